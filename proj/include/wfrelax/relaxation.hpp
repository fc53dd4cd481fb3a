#pragma once

// The four analyst edits on a relation matrix, with diffs, undo and replay.

#include "wfrelax/error.hpp"
#include "wfrelax/relations.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wfrelax {

enum class OpKind {
    RemoveActivity,    ///< every relation of x becomes ≺≻, including x with itself
    Decouple,          ///< a ≺≻ b
    ExclusiveToDirect, ///< a − b  =>  a → b;  a ← b  =>  a || b;  a − a  =>  a || a
    DirectToEventual,  ///< a → b  =>  a ≺ b;  a || b  =>  a ≺≻ b
};

constexpr std::string_view op_name(OpKind k) {
    switch (k) {
    case OpKind::RemoveActivity: return "remove_activity";
    case OpKind::Decouple: return "decouple";
    case OpKind::ExclusiveToDirect: return "exclusive_to_direct";
    case OpKind::DirectToEventual: return "direct_to_eventual";
    }
    return "?";
}

inline std::optional<OpKind> parse_op_name(std::string_view name) {
    for (auto k : {OpKind::RemoveActivity, OpKind::Decouple, OpKind::ExclusiveToDirect, OpKind::DirectToEventual})
        if (op_name(k) == name)
            return k;
    return std::nullopt;
}

struct RelaxationOp {
    OpKind kind;
    Activity a;
    Activity b; ///< unused for RemoveActivity

    static RelaxationOp remove_activity(Activity x) { return {OpKind::RemoveActivity, std::move(x), {}}; }
    static RelaxationOp decouple(Activity a, Activity b) { return {OpKind::Decouple, std::move(a), std::move(b)}; }
    static RelaxationOp exclusive_to_direct(Activity a, Activity b) {
        return {OpKind::ExclusiveToDirect, std::move(a), std::move(b)};
    }
    static RelaxationOp direct_to_eventual(Activity a, Activity b) {
        return {OpKind::DirectToEventual, std::move(a), std::move(b)};
    }

    bool operator==(const RelaxationOp&) const = default;
};

inline std::string describe(const RelaxationOp& op) {
    if (op.kind == OpKind::RemoveActivity)
        return std::string(op_name(op.kind)) + "(" + op.a + ")";
    return std::string(op_name(op.kind)) + "(" + op.a + ", " + op.b + ")";
}

using RelaxationScript = std::vector<RelaxationOp>;

struct CellChange {
    Activity row;
    Activity col;
    RelationKind before;
    RelationKind after;

    bool operator==(const CellChange&) const = default;
};

/// Changed cells in row-major order; both (a, b) and its mirror (b, a) appear.
struct MatrixDiff {
    std::vector<CellChange> changes;

    bool empty() const { return changes.empty(); }
    std::size_t size() const { return changes.size(); }
};

inline MatrixDiff diff(const RelationMatrix& before, const RelationMatrix& after) {
    MatrixDiff d;
    for (std::size_t i = 0; i < before.size(); ++i)
        for (std::size_t j = 0; j < before.size(); ++j)
            if (before.at(i, j) != after.at(i, j))
                d.changes.push_back({before.activities()[i], before.activities()[j], before.at(i, j), after.at(i, j)});
    return d;
}

namespace detail {

[[noreturn]] inline void precondition(const RelaxationOp& op, const RelationMatrix& m, const std::string& expected) {
    const auto state = std::string(symbol_code(m.at(op.a, op.b)));
    fail(ErrorCode::PreconditionViolated,
         describe(op) + " requires " + expected + " but cell(" + op.a + ", " + op.b + ") is '" + state + "'",
         "cell(" + op.a + ", " + op.b + ") = " + state);
}

} // namespace detail

inline std::pair<RelationMatrix, MatrixDiff> apply_op(const RelationMatrix& m, const RelaxationOp& op) {
    RelationMatrix out = m;
    const auto a = m.index_of(op.a);

    switch (op.kind) {
    case OpKind::RemoveActivity:
        for (std::size_t j = 0; j < m.size(); ++j)
            out.set(a, j, RelationKind::EventualBoth);
        break;

    case OpKind::Decouple: {
        const auto b = m.index_of(op.b);
        if (a == b)
            fail(ErrorCode::PreconditionViolated, describe(op) + " needs two distinct activities", op.a);
        out.set(a, b, RelationKind::EventualBoth);
        break;
    }

    case OpKind::ExclusiveToDirect: {
        const auto b = m.index_of(op.b);
        const auto cell = m.at(a, b);
        if (a == b) {
            if (cell != RelationKind::Exclusive)
                detail::precondition(op, m, "'-'");
            out.set(a, a, RelationKind::Concurrent);
        } else if (cell == RelationKind::Exclusive) {
            out.set(a, b, RelationKind::DirectForward);
        } else if (cell == RelationKind::DirectBackward) {
            out.set(a, b, RelationKind::Concurrent);
        } else {
            detail::precondition(op, m, "'-' or '<-'");
        }
        break;
    }

    case OpKind::DirectToEventual: {
        const auto b = m.index_of(op.b);
        const auto cell = m.at(a, b);
        if (cell == RelationKind::DirectForward)
            out.set(a, b, RelationKind::EventualForward);
        else if (cell == RelationKind::Concurrent)
            out.set(a, b, RelationKind::EventualBoth);
        else
            detail::precondition(op, m, "'->' or '||'");
        break;
    }
    }

    auto d = diff(m, out);
    return {std::move(out), std::move(d)};
}

/// Inverse of a recorded diff.
inline RelationMatrix revert(const RelationMatrix& after, const MatrixDiff& d) {
    RelationMatrix out = after;
    for (const auto& c : d.changes)
        out.set(out.index_of(c.row), out.index_of(c.col), c.before);
    return out;
}

struct HistoryEntry {
    RelaxationOp op;
    RelationMatrix result;
    MatrixDiff diff;
};

/// Drops the last entry and returns the matrix as it was before that op.
inline RelationMatrix undo(std::vector<HistoryEntry>& history) {
    if (history.empty())
        fail(ErrorCode::EmptyHistory, "nothing to undo");
    auto restored = revert(history.back().result, history.back().diff);
    history.pop_back();
    return restored;
}

inline RelationMatrix replay(const RelationMatrix& base, const RelaxationScript& script) {
    RelationMatrix m = base;
    for (std::size_t i = 0; i < script.size(); ++i) {
        try {
            m = apply_op(m, script[i]).first;
        } catch (const Error& e) {
            throw Error(e.code(), "script op " + std::to_string(i) + ": " + e.what(),
                        "index " + std::to_string(i) + (e.detail().empty() ? "" : "; " + e.detail()));
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Script file format: [{"op": "...", "a": "...", "b": "..."}, ...]

inline nlohmann::json to_json(const RelaxationOp& op) {
    nlohmann::json j{{"op", op_name(op.kind)}, {"a", op.a}};
    if (op.kind != OpKind::RemoveActivity)
        j["b"] = op.b;
    return j;
}

inline nlohmann::json to_json(const RelaxationScript& script) {
    auto j = nlohmann::json::array();
    for (const auto& op : script)
        j.push_back(to_json(op));
    return j;
}

inline nlohmann::json to_json(const MatrixDiff& d) {
    auto j = nlohmann::json::array();
    for (const auto& c : d.changes)
        j.push_back({{"row", c.row}, {"col", c.col}, {"old", symbol_code(c.before)}, {"new", symbol_code(c.after)}});
    return j;
}

inline RelaxationOp op_from_json(const nlohmann::json& j) {
    auto str = [&](const char* key) -> std::optional<std::string> {
        if (!j.contains(key))
            return std::nullopt;
        if (!j.at(key).is_string() || j.at(key).get<std::string>().empty())
            fail(ErrorCode::MalformedDocument, std::string("'") + key + "' must be a non-empty string");
        return j.at(key).get<std::string>();
    };
    if (!j.is_object())
        fail(ErrorCode::MalformedDocument, "relaxation op must be an object");
    auto name = str("op");
    auto kind = name ? parse_op_name(*name) : std::nullopt;
    if (!kind)
        fail(ErrorCode::MalformedDocument, "unknown relaxation op " + (name ? "'" + *name + "'" : std::string("<missing>")));
    auto a = str("a");
    if (!a)
        fail(ErrorCode::MalformedDocument, std::string(op_name(*kind)) + " needs 'a'");
    auto b = str("b");
    if (*kind == OpKind::RemoveActivity) {
        if (b)
            fail(ErrorCode::MalformedDocument, "remove_activity takes no 'b'");
        return RelaxationOp::remove_activity(*a);
    }
    if (!b)
        fail(ErrorCode::MalformedDocument, std::string(op_name(*kind)) + " needs 'b'");
    return {*kind, *a, *b};
}

inline RelaxationScript script_from_json(const nlohmann::json& j) {
    if (!j.is_array())
        fail(ErrorCode::MalformedDocument, "relaxation script must be an array");
    RelaxationScript s;
    for (const auto& op : j)
        s.push_back(op_from_json(op));
    return s;
}

} // namespace wfrelax
