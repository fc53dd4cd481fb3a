#pragma once

// Event-log ingestion and finite-trace evaluation of Init / ChainResponse /
// AlternateResponse constraints.

#include "wfrelax/constraints.hpp"
#include "wfrelax/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wfrelax {

using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

/// Accepts "YYYY-MM-DD HH:MM:SS" and ISO-8601 ("YYYY-MM-DDTHH:MM:SS[.ffffff][Z|±HH:MM]").
/// Offsets are normalised to UTC.
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
    std::size_t pos = 0;
    auto number = [&](std::size_t digits, int& out) {
        if (pos + digits > s.size())
            return false;
        auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + digits, out);
        if (ec != std::errc{} || p != s.data() + pos + digits)
            return false;
        pos += digits;
        return true;
    };
    auto expect = [&](char c) {
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    };

    int y, mo, d, h, mi, sec;
    if (!number(4, y) || !expect('-') || !number(2, mo) || !expect('-') || !number(2, d))
        return std::nullopt;
    if (!expect(' ') && !expect('T'))
        return std::nullopt;
    if (!number(2, h) || !expect(':') || !number(2, mi) || !expect(':') || !number(2, sec))
        return std::nullopt;

    std::chrono::microseconds frac{0};
    if (expect('.')) {
        std::int64_t scale = 100000, us = 0;
        std::size_t n = 0;
        for (; pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])); ++pos, ++n)
            if (scale > 0) {
                us += (s[pos] - '0') * scale;
                scale /= 10;
            }
        if (n == 0)
            return std::nullopt;
        frac = std::chrono::microseconds{us};
    }

    std::chrono::minutes offset{0};
    if (expect('Z')) {
    } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
        const int sign = s[pos] == '-' ? -1 : 1;
        ++pos;
        int oh, om;
        if (!number(2, oh))
            return std::nullopt;
        expect(':');
        if (!number(2, om) || oh > 23 || om > 59)
            return std::nullopt;
        offset = std::chrono::minutes{sign * (oh * 60 + om)};
    }
    if (pos != s.size())
        return std::nullopt;

    using namespace std::chrono;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 60)
        return std::nullopt;
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} + frac - offset;
}

struct Trace {
    std::string case_id;
    std::vector<Activity> events;
};

namespace detail {

inline std::string trim_field(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

/// One RFC 4180 record (quoted fields, "" for a literal quote); quoted fields
/// may not span lines.
inline std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c != '"')
                field += c;
            else if (i + 1 < line.size() && line[i + 1] == '"')
                field += line[++i];
            else
                quoted = false;
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(trim_field(std::move(field)));
            field.clear();
        } else {
            field += c;
        }
    }
    if (quoted)
        fail(ErrorCode::MalformedDocument, "line " + std::to_string(line_no) + ": unterminated quoted field",
             std::to_string(line_no));
    out.push_back(trim_field(std::move(field)));
    return out;
}

} // namespace detail

/// Comma-separated log with a header naming case_id, event_name and end_time
/// (in any order; extra columns are ignored). Events are grouped by case and
/// stably sorted by end_time, so ties keep file order. Traces appear in order
/// of their case's first row.
inline std::vector<Trace> parse_event_log(std::string_view document) {
    std::vector<std::string> lines;
    {
        std::size_t start = 0;
        while (start <= document.size()) {
            auto end = document.find('\n', start);
            if (end == std::string_view::npos)
                end = document.size();
            std::string line(document.substr(start, end - start));
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            lines.push_back(std::move(line));
            start = end + 1;
        }
    }
    auto is_blank = [](const std::string& l) { return detail::trim_field(l).empty(); };

    std::size_t header_line = 0;
    while (header_line < lines.size() && is_blank(lines[header_line]))
        ++header_line;
    if (header_line == lines.size())
        fail(ErrorCode::EmptyLog, "event log is empty");

    auto header = detail::split_csv_line(lines[header_line], header_line + 1);
    if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF"))
        header[0].erase(0, 3);
    auto column = [&](const char* name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            fail(ErrorCode::MissingColumn, std::string("missing column '") + name + "'", name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto case_col = column("case_id");
    const auto name_col = column("event_name");
    const auto time_col = column("end_time");
    const auto needed = std::max({case_col, name_col, time_col}) + 1;

    struct Row {
        Timestamp time;
        Activity activity;
    };
    std::map<std::string, std::size_t> case_index;
    std::vector<std::string> case_ids;
    std::vector<std::vector<Row>> rows;

    for (std::size_t i = header_line + 1; i < lines.size(); ++i) {
        if (is_blank(lines[i]))
            continue;
        const auto line_no = i + 1;
        auto fields = detail::split_csv_line(lines[i], line_no);
        if (fields.size() < needed)
            fail(ErrorCode::MalformedDocument, "line " + std::to_string(line_no) + ": too few fields",
                 std::to_string(line_no));
        const auto& cid = fields[case_col];
        const auto& name = fields[name_col];
        if (cid.empty() || name.empty())
            fail(ErrorCode::MalformedDocument, "line " + std::to_string(line_no) + ": empty case_id or event_name",
                 std::to_string(line_no));
        auto ts = parse_timestamp(fields[time_col]);
        if (!ts)
            fail(ErrorCode::UnparseableTimestamp,
                 "line " + std::to_string(line_no) + ": cannot parse timestamp '" + fields[time_col] + "'",
                 std::to_string(line_no));
        auto [it, inserted] = case_index.emplace(cid, rows.size());
        if (inserted) {
            case_ids.push_back(cid);
            rows.emplace_back();
        }
        rows[it->second].push_back({*ts, name});
    }
    if (rows.empty())
        fail(ErrorCode::EmptyLog, "event log has a header but no events");

    std::vector<Trace> traces;
    traces.reserve(rows.size());
    for (std::size_t c = 0; c < rows.size(); ++c) {
        auto& r = rows[c];
        std::stable_sort(r.begin(), r.end(), [](const Row& a, const Row& b) { return a.time < b.time; });
        Trace t{case_ids[c], {}};
        t.events.reserve(r.size());
        for (auto& row : r)
            t.events.push_back(std::move(row.activity));
        traces.push_back(std::move(t));
    }
    return traces;
}

// ---------------------------------------------------------------------------

struct Verdict {
    bool holds = true;
    std::vector<std::size_t> positions; ///< 1-based positions of the offending events
};

/// Init(P): the first event is in P. ChainResponse(P, Q): every P-event is
/// immediately followed by a Q-event. AlternateResponse(P, Q): every P-event
/// is followed by a Q-event with no P-event strictly in between.
inline Verdict evaluate_constraint(std::span<const Activity> events, const Constraint& c) {
    Verdict v;
    auto flag = [&](std::size_t i) {
        v.holds = false;
        v.positions.push_back(i + 1);
    };
    const auto n = events.size();

    switch (c.kind) {
    case Template::Init:
        if (n > 0 && !c.target.contains(events[0]))
            flag(0);
        break;

    case Template::ChainResponse:
        for (std::size_t i = 0; i < n; ++i)
            if (c.source.contains(events[i]) && (i + 1 == n || !c.target.contains(events[i + 1])))
                flag(i);
        break;

    case Template::AlternateResponse: {
        std::optional<std::size_t> pending;
        for (std::size_t i = 0; i < n; ++i) {
            if (c.target.contains(events[i]))
                pending.reset();
            if (c.source.contains(events[i])) {
                if (pending)
                    flag(*pending);
                pending = i;
            }
        }
        if (pending)
            flag(*pending);
        break;
    }
    }
    return v;
}

inline Verdict evaluate_constraint(const Trace& t, const Constraint& c) { return evaluate_constraint(t.events, c); }

struct TraceResult {
    std::string case_id;
    bool conforms = true;
    std::vector<Verdict> verdicts; ///< one per report constraint
};

struct ConformanceReport {
    std::vector<Constraint> constraints;
    std::vector<TraceResult> traces;
    std::size_t conforming = 0;
    std::vector<std::size_t> violating_traces; ///< per constraint

    double rate() const {
        return traces.empty() ? 0.0 : static_cast<double>(conforming) / static_cast<double>(traces.size());
    }

    /// Conformance rate rounded to three decimals, e.g. "0.823".
    std::string rate_text() const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", rate());
        return buf;
    }
};

inline ConformanceReport check_log(const std::vector<Trace>& traces, const ConstraintSet& cs) {
    ConformanceReport r;
    r.constraints.assign(cs.begin(), cs.end());
    r.violating_traces.assign(r.constraints.size(), 0);
    r.traces.reserve(traces.size());
    for (const auto& t : traces) {
        TraceResult tr{t.case_id, true, {}};
        tr.verdicts.reserve(r.constraints.size());
        for (std::size_t k = 0; k < r.constraints.size(); ++k) {
            auto v = evaluate_constraint(t, r.constraints[k]);
            if (!v.holds) {
                tr.conforms = false;
                ++r.violating_traces[k];
            }
            tr.verdicts.push_back(std::move(v));
        }
        if (tr.conforms)
            ++r.conforming;
        r.traces.push_back(std::move(tr));
    }
    return r;
}

inline nlohmann::json to_json(const ConformanceReport& r) {
    auto constraints = nlohmann::json::array();
    for (std::size_t k = 0; k < r.constraints.size(); ++k) {
        auto c = to_json(r.constraints[k]);
        c["violating_traces"] = r.violating_traces[k];
        constraints.push_back(std::move(c));
    }
    auto traces = nlohmann::json::array();
    for (const auto& t : r.traces) {
        auto violations = nlohmann::json::array();
        for (std::size_t k = 0; k < t.verdicts.size(); ++k)
            if (!t.verdicts[k].holds)
                violations.push_back({{"constraint", k}, {"positions", t.verdicts[k].positions}});
        traces.push_back({{"case_id", t.case_id}, {"conforms", t.conforms}, {"violations", std::move(violations)}});
    }
    return {
        {"total_traces", r.traces.size()},
        {"conforming_traces", r.conforming},
        {"conformance_rate", r.rate_text()},
        {"constraints", std::move(constraints)},
        {"traces", std::move(traces)},
    };
}

} // namespace wfrelax
