#pragma once

// SQL row-pattern (MATCH_RECOGNIZE) queries for branched-Declare constraints.
//
// Two modes:
//  - Paper: returns the cases where one satisfying occurrence of the
//    constraint's pattern exists (e.g. PATTERN (ANY* KPR (CPO | RR) ANY*)).
//  - Violation: returns exactly the cases on which the constraint is
//    violated under the checker's finite-trace semantics.

#include "wfrelax/constraints.hpp"
#include "wfrelax/error.hpp"

#include "json.hpp"

#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wfrelax {

enum class SqlMode { Paper, Violation };

constexpr std::string_view mode_name(SqlMode m) { return m == SqlMode::Paper ? "paper" : "violation"; }

inline std::optional<SqlMode> parse_mode(std::string_view s) {
    if (s == "paper")
        return SqlMode::Paper;
    if (s == "violation")
        return SqlMode::Violation;
    return std::nullopt;
}

struct SqlOptions {
    std::string schema; ///< when non-empty the table is referenced as <schema>.events
    std::string table_name() const { return schema.empty() ? "events" : schema + ".events"; }
};

/// Maps activity labels to pattern variables: upper-cased, non-alphanumerics
/// replaced by '_', a "V_" prefix when the result starts with a digit, and a
/// numeric suffix when the name is already taken (helper variables included).
class PatternNaming {
public:
    static constexpr std::array<std::string_view, 3> helpers{"ANY", "OTHER", "NEITHER"};

    explicit PatternNaming(const ActivitySet& alphabet) {
        std::set<std::string> taken(helpers.begin(), helpers.end());
        for (const auto& label : alphabet) {
            auto base = sanitize(label);
            auto name = base;
            for (int k = 2; taken.contains(name); ++k)
                name = base + "_" + std::to_string(k);
            taken.insert(name);
            names_.emplace(label, std::move(name));
        }
    }

    const std::string& variable(const Activity& label) const {
        auto it = names_.find(label);
        if (it == names_.end())
            fail(ErrorCode::UnknownActivity, "no pattern variable for activity '" + label + "'", label);
        return it->second;
    }

    static std::string sanitize(std::string_view label) {
        std::string out;
        for (unsigned char c : label)
            out += std::isalnum(c) && c < 0x80 ? static_cast<char>(std::toupper(c)) : '_';
        if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0])))
            out = "V_" + out;
        return out;
    }

private:
    std::map<Activity, std::string> names_;
};

inline std::string sql_literal(std::string_view s) {
    std::string out = "'";
    for (char c : s) {
        out += c;
        if (c == '\'')
            out += '\'';
    }
    return out + "'";
}

inline std::string emit_schema(const SqlOptions& opts = {}) {
    return "CREATE TABLE " + opts.table_name() +
           " (\n"
           "    case_id TEXT NOT NULL,\n"
           "    end_time TIMESTAMP NOT NULL,\n"
           "    event_name TEXT NOT NULL\n"
           ")";
}

namespace detail {

/// Accumulates a PATTERN body and the DEFINE entries in order of first use.
class PatternBuilder {
public:
    explicit PatternBuilder(const PatternNaming& naming) : naming_(naming) {}

    /// Single variable or a parenthesised alternation for sets.
    std::string group(const ActivitySet& s) {
        std::vector<std::string> vars;
        for (const auto& a : s)
            vars.push_back(label_var(a));
        if (vars.size() == 1)
            return vars.front();
        std::string out = "(";
        for (std::size_t i = 0; i < vars.size(); ++i)
            out += (i ? " | " : "") + vars[i];
        return out + ")";
    }

    std::string none_of(std::string_view helper, const ActivitySet& excluded) {
        std::string pred = "event_name NOT IN (";
        bool first = true;
        for (const auto& a : excluded) {
            pred += (first ? "" : ", ") + sql_literal(a);
            first = false;
        }
        define(std::string(helper), pred + ")");
        return std::string(helper);
    }

    std::string define_clause() const {
        std::string out = "DEFINE ";
        for (std::size_t i = 0; i < defines_.size(); ++i)
            out += (i ? ", " : "") + defines_[i].first + " AS " + defines_[i].second;
        return out;
    }

private:
    std::string label_var(const Activity& a) {
        const auto& v = naming_.variable(a);
        define(v, "event_name = " + sql_literal(a));
        return v;
    }

    void define(const std::string& var, std::string predicate) {
        for (const auto& d : defines_)
            if (d.first == var)
                return;
        defines_.emplace_back(var, std::move(predicate));
    }

    const PatternNaming& naming_;
    std::vector<std::pair<std::string, std::string>> defines_;
};

inline ActivitySet labels_of(const Constraint& c) {
    ActivitySet s = c.source;
    s.insert(c.target.begin(), c.target.end());
    return s;
}

} // namespace detail

inline std::string emit_query(const Constraint& c, SqlMode mode, const PatternNaming& naming,
                              const SqlOptions& opts = {}) {
    if (c.target.empty() || (c.kind != Template::Init && c.source.empty()))
        fail(ErrorCode::MalformedDocument, "constraint " + describe(c) + " has an empty activity set");

    detail::PatternBuilder b(naming);
    std::string pattern;

    if (mode == SqlMode::Paper) {
        switch (c.kind) {
        case Template::Init:
            pattern = "^" + b.group(c.target) + " ANY*";
            break;
        case Template::ChainResponse: {
            // Separate statements: DEFINE entries follow the order of first use.
            auto src = b.group(c.source);
            pattern = "ANY* " + src + " " + b.group(c.target) + " ANY*";
            break;
        }
        case Template::AlternateResponse: {
            auto src = b.group(c.source);
            auto other = b.none_of("OTHER", c.source);
            auto tgt = b.group(c.target);
            pattern = "ANY* " + src + " " + other + "* " + tgt + " ANY*";
            break;
        }
        default:
            fail(ErrorCode::UnsupportedTemplate, "no SQL translation for " + describe(c));
        }
    } else {
        switch (c.kind) {
        case Template::Init:
            pattern = "^" + b.none_of("OTHER", c.target);
            break;
        case Template::ChainResponse: {
            auto src = b.group(c.source);
            auto other = b.none_of("OTHER", c.target);
            pattern = src + " " + other + " | " + src + " $";
            break;
        }
        case Template::AlternateResponse: {
            // A P-event whose next P∪Q event is a P-only event, or that has none.
            auto src = b.group(c.source);
            auto neither = b.none_of("NEITHER", detail::labels_of(c));
            ActivitySet source_only;
            for (const auto& a : c.source)
                if (!c.target.contains(a))
                    source_only.insert(a);
            if (!source_only.empty()) {
                auto only = b.group(source_only);
                pattern = src + " " + neither + "* " + only + " | ";
            }
            pattern += src + " " + neither + "* $";
            break;
        }
        default:
            fail(ErrorCode::UnsupportedTemplate, "no SQL translation for " + describe(c));
        }
    }

    const char* select = mode == SqlMode::Paper ? "SELECT case_id" : "SELECT DISTINCT case_id";
    return std::string(select) + " FROM " + opts.table_name() +
           " MATCH_RECOGNIZE (\n"
           "    PARTITION BY case_id\n"
           "    ORDER BY end_time\n"
           "    ONE ROW PER MATCH\n"
           "    PATTERN (" +
           pattern + ")\n    " + b.define_clause() + "\n)";
}

/// Names variables over the constraint's own labels.
inline std::string emit_query(const Constraint& c, SqlMode mode, const SqlOptions& opts = {}) {
    return emit_query(c, mode, PatternNaming(detail::labels_of(c)), opts);
}

struct QueryEntry {
    Constraint constraint;
    std::string sql;
};

struct QueryBundle {
    SqlMode mode = SqlMode::Paper;
    std::string schema;
    std::vector<QueryEntry> queries;

    /// The whole bundle as one script; schema first, one statement per query.
    std::string script() const {
        std::string out = schema + ";\n";
        for (const auto& q : queries)
            out += "\n-- " + describe(q.constraint) + "\n" + q.sql + ";\n";
        return out;
    }
};

inline QueryBundle render_bundle(const ConstraintSet& cs, SqlMode mode, const SqlOptions& opts = {}) {
    ActivitySet alphabet;
    for (const auto& c : cs) {
        auto l = detail::labels_of(c);
        alphabet.insert(l.begin(), l.end());
    }
    const PatternNaming naming(alphabet);
    QueryBundle bundle{mode, emit_schema(opts), {}};
    for (const auto& c : cs)
        bundle.queries.push_back({c, emit_query(c, mode, naming, opts)});
    return bundle;
}

inline nlohmann::json to_json(const QueryBundle& b) {
    auto qs = nlohmann::json::array();
    for (const auto& q : b.queries)
        qs.push_back({{"constraint", to_json(q.constraint)}, {"sql", q.sql}});
    return {{"mode", mode_name(b.mode)}, {"schema", b.schema}, {"queries", std::move(qs)}, {"script", b.script()}};
}

} // namespace wfrelax
