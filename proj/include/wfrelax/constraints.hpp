#pragma once

// Branched-Declare constraint generation from a (relaxed) relation matrix.

#include "wfrelax/error.hpp"
#include "wfrelax/relations.hpp"

#include "json.hpp"

#include <compare>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wfrelax {

using ActivitySet = std::set<Activity>;

/// Declaration order is also the output order of a ConstraintSet.
enum class Template {
    Init,
    ChainResponse,
    AlternateResponse,
};

constexpr std::string_view template_name(Template t) {
    switch (t) {
    case Template::Init: return "Init";
    case Template::ChainResponse: return "ChainResponse";
    case Template::AlternateResponse: return "AlternateResponse";
    }
    return "?";
}

struct Constraint {
    Template kind;
    ActivitySet source; ///< empty for Init
    ActivitySet target;

    static Constraint init(ActivitySet p) { return {Template::Init, {}, std::move(p)}; }
    static Constraint chain_response(ActivitySet p, ActivitySet q) {
        return {Template::ChainResponse, std::move(p), std::move(q)};
    }
    static Constraint alternate_response(ActivitySet p, ActivitySet q) {
        return {Template::AlternateResponse, std::move(p), std::move(q)};
    }

    auto operator<=>(const Constraint&) const = default;
};

/// Ordered: Init first, then by template, then lexicographically by sets.
using ConstraintSet = std::set<Constraint>;

inline std::string describe(const ActivitySet& s) {
    std::string out = "{";
    for (const auto& a : s)
        out += (out.size() > 1 ? "," : "") + a;
    return out + "}";
}

inline std::string describe(const Constraint& c) {
    if (c.kind == Template::Init)
        return "Init(" + describe(c.target) + ")";
    return std::string(template_name(c.kind)) + "(" + describe(c.source) + ", " + describe(c.target) + ")";
}

struct ExtractedRelations {
    PairSet direct;     ///< D
    PairSet eventually; ///< E
};

/// D = cells → and || (a diagonal || yields (a, a)); E = cells ≺.
inline ExtractedRelations extract_relations(const RelationMatrix& m) {
    ExtractedRelations r;
    const auto& acts = m.activities();
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j) {
            auto k = m.at(i, j);
            if (k == RelationKind::DirectForward || k == RelationKind::Concurrent)
                r.direct.emplace(acts[i], acts[j]);
            else if (k == RelationKind::EventualForward)
                r.eventually.emplace(acts[i], acts[j]);
        }
    return r;
}

/// Activities of `alphabet` that never occur as a successor in d.
inline ActivitySet get_start_activities(const PairSet& d, const ActivitySet& alphabet) {
    ActivitySet successors;
    for (const auto& [a, b] : d)
        successors.insert(b);
    ActivitySet out;
    for (const auto& a : alphabet)
        if (!successors.contains(a))
            out.insert(a);
    return out;
}

/// Bypass pattern: some predecessor a and successor b of x, neither in
/// parallel with x nor with each other, are directly connected by (a, b).
inline bool is_optional_activity(const Activity& x, const PairSet& d) {
    for (const auto& [a, x1] : d) {
        if (x1 != x || d.contains({x, a}))
            continue;
        for (auto it = d.lower_bound({x, Activity{}}); it != d.end() && it->first == x; ++it) {
            const auto& b = it->second;
            if (!d.contains({b, x}) && !d.contains({b, a}) && d.contains({a, b}))
                return true;
        }
    }
    return false;
}

/// Generates the constraint set from D and E:
///  1. Init over the start activities;
///  2. for each source a in D, ChainResponse({a}, successors of a);
///  3. for each pair of a's successors that are mutually directly-following,
///     AlternateResponse({a}, {b}) for every non-optional member b;
///  4. for each source a in E, AlternateResponse({a}, S) where S holds a's
///     E-successors outside TC(D), when S is non-empty.
/// Init is left out when no activity qualifies as a start activity.
inline ConstraintSet generate_constraints(const PairSet& d, const PairSet& e, const ActivitySet& alphabet) {
    if (alphabet.empty())
        fail(ErrorCode::EmptyAlphabet, "cannot generate constraints over an empty alphabet");

    ConstraintSet out;
    if (auto start = get_start_activities(d, alphabet); !start.empty())
        out.insert(Constraint::init(std::move(start)));

    auto successors = [](const PairSet& pairs, const Activity& a) {
        ActivitySet s;
        for (auto it = pairs.lower_bound({a, Activity{}}); it != pairs.end() && it->first == a; ++it)
            s.insert(it->second);
        return s;
    };

    ActivitySet direct_sources;
    for (const auto& [a, b] : d)
        direct_sources.insert(a);
    for (const auto& a : direct_sources) {
        const auto s = successors(d, a);
        out.insert(Constraint::chain_response({a}, s));
        for (auto b = s.begin(); b != s.end(); ++b)
            for (auto c = std::next(b); c != s.end(); ++c) {
                if (!d.contains({*b, *c}) || !d.contains({*c, *b}))
                    continue;
                if (!is_optional_activity(*b, d))
                    out.insert(Constraint::alternate_response({a}, {*b}));
                if (!is_optional_activity(*c, d))
                    out.insert(Constraint::alternate_response({a}, {*c}));
            }
    }

    const auto closure = transitive_closure(d);
    ActivitySet eventual_sources;
    for (const auto& [a, b] : e)
        eventual_sources.insert(a);
    for (const auto& a : eventual_sources) {
        ActivitySet s;
        for (const auto& x : successors(e, a))
            if (!closure.contains({a, x}))
                s.insert(x);
        if (!s.empty())
            out.insert(Constraint::alternate_response({a}, std::move(s)));
    }
    return out;
}

/// Convenience: extract D and E from the matrix and use its activities as the
/// alphabet.
inline ConstraintSet generate_constraints(const RelationMatrix& m) {
    auto r = extract_relations(m);
    return generate_constraints(r.direct, r.eventually, ActivitySet(m.activities().begin(), m.activities().end()));
}

// ---------------------------------------------------------------------------
// Constraint file format:
//   [{"template": "Init", "target": [...]},
//    {"template": "ChainResponse", "source": [...], "target": [...]}, ...]

inline nlohmann::json to_json(const Constraint& c) {
    nlohmann::json j{{"template", template_name(c.kind)}};
    if (c.kind != Template::Init)
        j["source"] = c.source;
    j["target"] = c.target;
    return j;
}

inline nlohmann::json to_json(const ConstraintSet& cs) {
    auto j = nlohmann::json::array();
    for (const auto& c : cs)
        j.push_back(to_json(c));
    return j;
}

inline Constraint constraint_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("template") || !j.at("template").is_string())
        fail(ErrorCode::MalformedDocument, "constraint needs a 'template' string");
    const auto name = j.at("template").get<std::string>();

    auto set = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_array() || j.at(key).empty())
            fail(ErrorCode::MalformedDocument, name + " needs a non-empty '" + key + "' array");
        ActivitySet s;
        for (const auto& a : j.at(key)) {
            if (!a.is_string() || a.get<std::string>().empty())
                fail(ErrorCode::MalformedDocument, std::string("'") + key + "' entries must be non-empty strings");
            s.insert(a.get<std::string>());
        }
        return s;
    };

    if (name == "Init") {
        if (j.contains("source"))
            fail(ErrorCode::MalformedDocument, "Init takes no 'source'");
        return Constraint::init(set("target"));
    }
    if (name == "ChainResponse")
        return Constraint::chain_response(set("source"), set("target"));
    if (name == "AlternateResponse")
        return Constraint::alternate_response(set("source"), set("target"));
    fail(ErrorCode::UnsupportedTemplate, "unsupported template '" + name + "'", name);
}

inline ConstraintSet constraints_from_json(const nlohmann::json& j) {
    if (!j.is_array())
        fail(ErrorCode::MalformedDocument, "constraint document must be an array");
    ConstraintSet cs;
    for (const auto& c : j)
        cs.insert(constraint_from_json(c));
    return cs;
}

} // namespace wfrelax
