#pragma once

// Hand-rolled random generators for property tests. All take an explicit
// engine so failures are reproducible from the seed.

#include "wfrelax/checker.hpp"
#include "wfrelax/constraints.hpp"
#include "wfrelax/relations.hpp"
#include "wfrelax/relaxation.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

namespace wfrelax::testing {

using Rng = std::mt19937;

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

inline std::vector<Activity> letters(int n) {
    std::vector<Activity> out;
    for (int i = 0; i < n; ++i)
        out.emplace_back(1, static_cast<char>('a' + i));
    return out;
}

template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
    return v[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(v.size()) - 1))];
}

inline ActivitySet random_subset(Rng& rng, const std::vector<Activity>& alphabet, bool non_empty = true) {
    ActivitySet s;
    do {
        s.clear();
        for (const auto& a : alphabet)
            if (chance(rng, 0.4))
                s.insert(a);
    } while (non_empty && s.empty());
    return s;
}

inline PairSet random_pairs(Rng& rng, const std::vector<Activity>& alphabet, double density) {
    PairSet d;
    for (const auto& a : alphabet)
        for (const auto& b : alphabet)
            if (chance(rng, density))
                d.emplace(a, b);
    return d;
}

/// Every op whose preconditions hold on `m`.
inline std::vector<RelaxationOp> applicable_ops(const RelationMatrix& m) {
    std::vector<RelaxationOp> out;
    const auto& acts = m.activities();
    for (std::size_t i = 0; i < m.size(); ++i) {
        out.push_back(RelaxationOp::remove_activity(acts[i]));
        for (std::size_t j = 0; j < m.size(); ++j) {
            const auto k = m.at(i, j);
            if (i != j)
                out.push_back(RelaxationOp::decouple(acts[i], acts[j]));
            if (k == RelationKind::Exclusive || (i != j && k == RelationKind::DirectBackward))
                out.push_back(RelaxationOp::exclusive_to_direct(acts[i], acts[j]));
            if (k == RelationKind::DirectForward || k == RelationKind::Concurrent)
                out.push_back(RelaxationOp::direct_to_eventual(acts[i], acts[j]));
        }
    }
    return out;
}

inline RelaxationOp random_op(Rng& rng, const RelationMatrix& m) { return pick(rng, applicable_ops(m)); }

/// A matrix derived from a random D, then relaxed by up to `max_ops` ops so
/// the eventual relations show up too.
inline RelationMatrix random_matrix(Rng& rng, int alphabet_size, int max_ops = 3) {
    const auto acts = letters(alphabet_size);
    auto m = build_matrix(random_pairs(rng, acts, 0.3), acts);
    for (int k = uniform(rng, 0, max_ops); k > 0; --k)
        m = apply_op(m, random_op(rng, m)).first;
    return m;
}

inline Constraint random_constraint(Rng& rng, const std::vector<Activity>& alphabet) {
    switch (uniform(rng, 0, 2)) {
    case 0: return Constraint::init(random_subset(rng, alphabet));
    case 1: return Constraint::chain_response(random_subset(rng, alphabet), random_subset(rng, alphabet));
    default: return Constraint::alternate_response(random_subset(rng, alphabet), random_subset(rng, alphabet));
    }
}

inline std::vector<Activity> random_trace(Rng& rng, const std::vector<Activity>& alphabet, int min_len, int max_len) {
    std::vector<Activity> t(static_cast<std::size_t>(uniform(rng, min_len, max_len)));
    for (auto& e : t)
        e = pick(rng, alphabet);
    return t;
}

/// All traces over `alphabet` of length 1..max_len.
inline std::vector<std::vector<Activity>> all_traces(const std::vector<Activity>& alphabet, std::size_t max_len) {
    std::vector<std::vector<Activity>> out, layer{{}};
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<std::vector<Activity>> next;
        for (const auto& t : layer)
            for (const auto& a : alphabet) {
                next.push_back(t);
                next.back().push_back(a);
            }
        out.insert(out.end(), next.begin(), next.end());
        layer = std::move(next);
    }
    return out;
}

inline std::string timestamp_for(int seconds) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "2024-01-01 %02d:%02d:%02d", seconds / 3600, seconds / 60 % 60, seconds % 60);
    return buf;
}

struct LogCase {
    std::string case_id;
    std::vector<Activity> events;
};

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

/// CSV with rows of different cases interleaved and shuffled; timestamps
/// are strictly increasing within a case.
inline std::string to_csv(Rng& rng, const std::vector<LogCase>& cases) {
    struct Row {
        std::string cid, time, name;
    };
    std::vector<Row> rows;
    for (const auto& c : cases)
        for (std::size_t i = 0; i < c.events.size(); ++i)
            rows.push_back({c.case_id, timestamp_for(static_cast<int>(i) * 7 + uniform(rng, 0, 6)), c.events[i]});
    std::shuffle(rows.begin(), rows.end(), rng);
    std::string csv = "case_id,end_time,event_name\n";
    for (const auto& r : rows)
        csv += csv_field(r.cid) + "," + r.time + "," + csv_field(r.name) + "\n";
    return csv;
}

} // namespace wfrelax::testing
