#pragma once

// Directly-follows derivation, the behavioural relation matrix and the
// transitive closure of a directly-follows set.

#include "wfrelax/error.hpp"
#include "wfrelax/wfnet.hpp"

#include "json.hpp"

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wfrelax {

using Activity = std::string;
using ActivityPair = std::pair<Activity, Activity>;
/// A set of ordered activity pairs: D (directly-follows), E (eventually-follows)
/// or a transitive closure.
using PairSet = std::set<ActivityPair>;

enum class RelationKind : std::uint8_t {
    DirectForward,    // ->
    DirectBackward,   // <-
    Concurrent,       // ||
    Exclusive,        // -
    EventualForward,  // <   (≺)
    EventualBackward, // >   (≻)
    EventualBoth,     // <>  (≺≻)
};

inline constexpr std::array<RelationKind, 7> all_relation_kinds{
    RelationKind::DirectForward,   RelationKind::DirectBackward,   RelationKind::Concurrent,
    RelationKind::Exclusive,       RelationKind::EventualForward,  RelationKind::EventualBackward,
    RelationKind::EventualBoth,
};

constexpr RelationKind mirror(RelationKind k) {
    switch (k) {
    case RelationKind::DirectForward: return RelationKind::DirectBackward;
    case RelationKind::DirectBackward: return RelationKind::DirectForward;
    case RelationKind::EventualForward: return RelationKind::EventualBackward;
    case RelationKind::EventualBackward: return RelationKind::EventualForward;
    default: return k;
    }
}

/// Relations an activity may have with itself.
constexpr bool allowed_on_diagonal(RelationKind k) {
    return k == RelationKind::Exclusive || k == RelationKind::Concurrent || k == RelationKind::EventualBoth;
}

/// ASCII code used in matrix files and API payloads.
constexpr std::string_view symbol_code(RelationKind k) {
    switch (k) {
    case RelationKind::DirectForward: return "->";
    case RelationKind::DirectBackward: return "<-";
    case RelationKind::Concurrent: return "||";
    case RelationKind::Exclusive: return "-";
    case RelationKind::EventualForward: return "<";
    case RelationKind::EventualBackward: return ">";
    case RelationKind::EventualBoth: return "<>";
    }
    return "?";
}

constexpr std::string_view display_symbol(RelationKind k) {
    switch (k) {
    case RelationKind::DirectForward: return "→";
    case RelationKind::DirectBackward: return "←";
    case RelationKind::Concurrent: return "||";
    case RelationKind::Exclusive: return "−";
    case RelationKind::EventualForward: return "≺";
    case RelationKind::EventualBackward: return "≻";
    case RelationKind::EventualBoth: return "≺≻";
    }
    return "?";
}

inline std::optional<RelationKind> parse_symbol_code(std::string_view code) {
    for (auto k : all_relation_kinds)
        if (symbol_code(k) == code)
            return k;
    return std::nullopt;
}

/// Square matrix over an ordered activity list. Every mutation goes through
/// `set`, which writes the mirrored cell as well, so mirror symmetry and the
/// diagonal alphabet hold for every instance.
class RelationMatrix {
public:
    RelationMatrix() = default;

    /// All cells −.
    explicit RelationMatrix(std::vector<Activity> activities);

    /// Validates labels, dimensions, mirror symmetry and the diagonal.
    RelationMatrix(std::vector<Activity> activities, std::vector<RelationKind> row_major_cells);

    std::size_t size() const { return activities_.size(); }
    const std::vector<Activity>& activities() const { return activities_; }

    std::size_t index_of(std::string_view activity) const;
    bool contains(std::string_view activity) const { return index_.find(activity) != index_.end(); }

    RelationKind at(std::size_t row, std::size_t col) const { return cells_[row * size() + col]; }
    RelationKind at(std::string_view row, std::string_view col) const { return at(index_of(row), index_of(col)); }

    /// Sets (row, col) to `k` and (col, row) to mirror(k).
    void set(std::size_t row, std::size_t col, RelationKind k);

    bool operator==(const RelationMatrix&) const = default;

private:
    std::vector<Activity> activities_;
    std::vector<RelationKind> cells_;
    std::map<Activity, std::size_t, std::less<>> index_;
};

inline RelationMatrix::RelationMatrix(std::vector<Activity> activities)
    : RelationMatrix(activities, std::vector<RelationKind>(activities.size() * activities.size(),
                                                           RelationKind::Exclusive)) {}

inline RelationMatrix::RelationMatrix(std::vector<Activity> activities, std::vector<RelationKind> cells)
    : activities_(std::move(activities)), cells_(std::move(cells)) {
    const auto n = activities_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (activities_[i].empty())
            fail(ErrorCode::MalformedDocument, "empty activity label in matrix");
        if (!index_.emplace(activities_[i], i).second)
            fail(ErrorCode::MalformedDocument, "activity '" + activities_[i] + "' appears twice in the matrix",
                 activities_[i]);
    }
    if (cells_.size() != n * n)
        fail(ErrorCode::MalformedDocument, "matrix has " + std::to_string(cells_.size()) + " cells, expected " +
                                               std::to_string(n * n));
    for (std::size_t i = 0; i < n; ++i) {
        if (!allowed_on_diagonal(at(i, i)))
            fail(ErrorCode::MalformedDocument,
                 "diagonal cell of '" + activities_[i] + "' is " + std::string(symbol_code(at(i, i))),
                 activities_[i]);
        for (std::size_t j = i + 1; j < n; ++j)
            if (at(i, j) != mirror(at(j, i)))
                fail(ErrorCode::MalformedDocument,
                     "cells (" + activities_[i] + ", " + activities_[j] + ") and (" + activities_[j] + ", " +
                         activities_[i] + ") are not mirror images",
                     activities_[i] + "," + activities_[j]);
    }
}

inline std::size_t RelationMatrix::index_of(std::string_view activity) const {
    auto it = index_.find(activity);
    if (it == index_.end())
        fail(ErrorCode::UnknownActivity, "unknown activity '" + std::string(activity) + "'", std::string(activity));
    return it->second;
}

inline void RelationMatrix::set(std::size_t row, std::size_t col, RelationKind k) {
    if (row == col && !allowed_on_diagonal(k))
        fail(ErrorCode::PreconditionViolated,
             "'" + std::string(symbol_code(k)) + "' is not allowed on the diagonal", activities_[row]);
    cells_[row * size() + col] = k;
    cells_[col * size() + row] = mirror(k);
}

// ---------------------------------------------------------------------------

/// (a, b) is in the result iff some firing sequence from the initial marking
/// fires the transition labelled a, then only silent transitions, then the
/// transition labelled b. `graph` must be the complete reachability graph of
/// a sound net (as returned by `check_soundness`).
inline PairSet derive_directly_follows(const WorkflowNet& net, const ReachabilityGraph& graph) {
    const auto& ts = net.transitions();
    const auto n = graph.states.size();

    // Visible transitions enabled somewhere in the silent closure of each state.
    std::vector<std::optional<std::set<std::size_t>>> cache(n);
    auto visible_after = [&](std::size_t start) -> const std::set<std::size_t>& {
        if (cache[start])
            return *cache[start];
        std::set<std::size_t> visible;
        std::vector<bool> seen(n, false);
        std::vector<std::size_t> stack{start};
        seen[start] = true;
        while (!stack.empty()) {
            auto s = stack.back();
            stack.pop_back();
            for (const auto& e : graph.successors[s]) {
                if (!ts[e.transition].silent()) {
                    visible.insert(e.transition);
                } else if (!seen[e.target]) {
                    seen[e.target] = true;
                    stack.push_back(e.target);
                }
            }
        }
        cache[start] = std::move(visible);
        return *cache[start];
    };

    PairSet out;
    for (std::size_t s = 0; s < n; ++s)
        for (const auto& e : graph.successors[s]) {
            if (ts[e.transition].silent())
                continue;
            for (auto next : visible_after(e.target))
                out.emplace(*ts[e.transition].label, *ts[next].label);
        }
    return out;
}

inline RelationMatrix build_matrix(const PairSet& d, const std::vector<Activity>& activities) {
    RelationMatrix m(activities);
    for (const auto& [a, b] : d) {
        m.index_of(a);
        m.index_of(b);
    }
    const auto n = activities.size();
    for (std::size_t i = 0; i < n; ++i) {
        const bool self = d.contains({activities[i], activities[i]});
        m.set(i, i, self ? RelationKind::Concurrent : RelationKind::Exclusive);
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool fwd = d.contains({activities[i], activities[j]});
            const bool bwd = d.contains({activities[j], activities[i]});
            auto k = fwd && bwd ? RelationKind::Concurrent
                     : fwd      ? RelationKind::DirectForward
                     : bwd      ? RelationKind::DirectBackward
                                : RelationKind::Exclusive;
            m.set(i, j, k);
        }
    }
    return m;
}

/// TC(d): pairs (p, q) connected by a path of one or more steps in d.
inline PairSet transitive_closure(const PairSet& d) {
    std::map<Activity, std::vector<Activity>> succ;
    for (const auto& [a, b] : d)
        succ[a].push_back(b);

    PairSet out;
    for (const auto& [start, direct] : succ) {
        std::set<Activity> seen;
        std::vector<Activity> stack(direct.begin(), direct.end());
        while (!stack.empty()) {
            auto v = std::move(stack.back());
            stack.pop_back();
            if (!seen.insert(v).second)
                continue;
            if (auto it = succ.find(v); it != succ.end())
                stack.insert(stack.end(), it->second.begin(), it->second.end());
        }
        for (const auto& v : seen)
            out.emplace(start, v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Matrix file format: {"activities": [...], "cells": [[code, ...], ...]}

inline nlohmann::json to_json(const RelationMatrix& m) {
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < m.size(); ++j)
            row.push_back(std::string(symbol_code(m.at(i, j))));
        cells.push_back(std::move(row));
    }
    return {{"activities", m.activities()}, {"cells", std::move(cells)}};
}

inline RelationMatrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("activities") || !j.contains("cells"))
        fail(ErrorCode::MalformedDocument, "matrix document needs 'activities' and 'cells'");
    const auto& acts = j.at("activities");
    const auto& rows = j.at("cells");
    if (!acts.is_array() || !rows.is_array())
        fail(ErrorCode::MalformedDocument, "'activities' and 'cells' must be arrays");

    std::vector<Activity> activities;
    for (const auto& a : acts) {
        if (!a.is_string())
            fail(ErrorCode::MalformedDocument, "activity labels must be strings");
        activities.push_back(a.get<std::string>());
    }
    if (rows.size() != activities.size())
        fail(ErrorCode::MalformedDocument, "'cells' must have one row per activity");

    std::vector<RelationKind> cells;
    cells.reserve(activities.size() * activities.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (!row.is_array() || row.size() != activities.size())
            fail(ErrorCode::MalformedDocument, "row " + std::to_string(r) + " has the wrong length");
        for (const auto& c : row) {
            auto k = c.is_string() ? parse_symbol_code(c.get<std::string>()) : std::nullopt;
            if (!k)
                fail(ErrorCode::MalformedDocument, "unknown relation code " + c.dump() + " in row " + std::to_string(r));
            cells.push_back(*k);
        }
    }
    return RelationMatrix(std::move(activities), std::move(cells));
}

} // namespace wfrelax
