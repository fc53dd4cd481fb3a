// Acceptance gate: runs every primary criterion at its stated tolerance and
// prints one PASS/FAIL line each. Exit status is non-zero if any fails.

#include "support/generators.hpp"
#include "support/ltlf.hpp"
#include "support/match_recognize.hpp"
#include "support/nets.hpp"
#include "support/trace_oracle.hpp"

#include "wfrelax/wfrelax.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace wfrelax;
using namespace wfrelax::testing;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool has(const std::string& text, const std::string& fragment) { return text.find(fragment) != std::string::npos; }

// ---------------------------------------------------------------------------

Outcome table3() {
    const auto t0 = Clock::now();
    auto model = derive_model(running_example_pnml());
    const double s = seconds_since(t0);
    const bool exact = model.matrix == table3_matrix() && model.directly_follows.size() == 8;
    return {exact && s < 1.0, fmt("matrix %s, %zu directed pairs, %.3f s (limit 1 s)",
                                  exact ? "identical" : "differs", model.directly_follows.size(), s)};
}

Outcome table4() {
    using C = Constraint;
    auto cs = generate_constraints(derive_model(running_example_pnml()).matrix);
    int found = 0;
    for (const auto& c : {C::init({"CPR"}), C::chain_response({"KPR"}, {"CPO", "RR"}), C::chain_response({"RI"}, {"SP"})})
        found += cs.contains(c);

    const auto script = render_bundle(cs, SqlMode::Paper).script();
    const std::vector<std::string> fragments{
        "PATTERN (^CPR ANY*)\n    DEFINE CPR AS event_name = 'CPR'\n",
        "PATTERN (ANY* KPR (CPO | RR) ANY*)\n"
        "    DEFINE KPR AS event_name = 'KPR', CPO AS event_name = 'CPO', RR AS event_name = 'RR'\n",
        "PATTERN (ANY* RI SP ANY*)\n    DEFINE RI AS event_name = 'RI', SP AS event_name = 'SP'\n",
    };
    int matched = 0;
    for (const auto& f : fragments)
        matched += has(script, f);
    const bool shape = has(script, "SELECT case_id FROM events MATCH_RECOGNIZE (") && has(script, "ONE ROW PER MATCH");
    return {found == 3 && matched == 3 && shape,
            fmt("%d/3 constraints present, %d/3 PATTERN/DEFINE fragments byte-identical", found, matched)};
}

Outcome scenario() {
    const auto t0 = Clock::now();
    auto model = derive_model(running_example_pnml());
    auto traces = parse_event_log(table1_log());
    auto before = check_log(traces, generate_constraints(model.matrix));
    auto script = script_from_json(nlohmann::json::parse(data_file("relax_pqc_co.json")));
    auto relaxed = replay(model.matrix, script);
    auto after = check_log(traces, generate_constraints(relaxed));
    const double s = seconds_since(t0);
    const bool ok = traces.size() == 1 && traces[0].events.size() == 6 && before.rate_text() == "0.000" &&
                    after.rate_text() == "1.000" && s < 1.0;
    return {ok, fmt("rate %s -> %s after [RemoveActivity(PQC), RemoveActivity(CO)], %.3f s (limit 1 s)",
                    before.rate_text().c_str(), after.rate_text().c_str(), s)};
}

Outcome df_oracle() {
    RandomNetGenerator gen(2024);
    const int n = 250;
    int agree = 0, valid = 0;
    for (int k = 0; k < n; ++k) {
        auto net = gen.generate();
        auto verdict = check_soundness(net);
        if (!verdict.sound || !check_free_choice(net) || net.activities().size() > 8)
            continue;
        ++valid;
        agree += derive_directly_follows(net, verdict.graph) == TraceOracle(net).directly_follows();
    }
    return {valid == n && agree == n, fmt("%d/%d nets sound and free-choice, %d/%d agree", valid, n, agree, n)};
}

Outcome checker_oracle() {
    Rng rng(77);
    const int n = 2000;
    int agree = 0;
    for (int k = 0; k < n; ++k) {
        auto alphabet = letters(uniform(rng, 1, 4));
        auto c = random_constraint(rng, alphabet);
        auto t = random_trace(rng, alphabet, 1, 6);
        auto got = evaluate_constraint(t, c);
        auto want = ltlf::evaluate(c, t);
        auto positions = want.failing;
        if (c.kind == Template::Init && !positions.empty())
            positions = {1};
        agree += got.holds == want.holds && got.positions == positions;
    }
    return {agree == n, fmt("%d/%d (trace, constraint) pairs agree", agree, n)};
}

Outcome sql_oracle() {
    Rng rng(99);
    const std::vector<Activity> pool{"a", "Record Goods Receipt", "it's", "b,c", "any", "1st"};
    const int logs = 60;
    int agree = 0, total = 0;
    for (int k = 0; k < logs; ++k) {
        std::vector<Activity> alphabet(pool.begin(), pool.begin() + uniform(rng, 1, 5));
        std::vector<LogCase> cases;
        for (int c = uniform(rng, 1, 20); c > 0; --c)
            cases.push_back({"case-" + std::to_string(c), random_trace(rng, alphabet, 1, 8)});
        const auto csv = to_csv(rng, cases);
        auto traces = parse_event_log(csv);

        std::vector<EventRow> rows;
        {
            std::istringstream in(csv);
            std::string line;
            std::getline(in, line);
            while (std::getline(in, line)) {
                auto f = wfrelax::detail::split_csv_line(line, 0);
                rows.push_back({f[0], f[1], f[2]});
            }
        }

        // Constraints from a relaxed matrix over this alphabet plus random ones.
        ConstraintSet cs;
        {
            auto m = build_matrix(random_pairs(rng, alphabet, 0.3), alphabet);
            for (int i = uniform(rng, 0, 2); i > 0; --i)
                m = apply_op(m, random_op(rng, m)).first;
            cs = generate_constraints(m);
        }
        for (int i = 0; i < 4; ++i)
            cs.insert(random_constraint(rng, alphabet));

        auto bundle = render_bundle(cs, SqlMode::Violation);
        for (const auto& q : bundle.queries) {
            std::set<std::string> expected;
            for (const auto& t : traces)
                if (!evaluate_constraint(t, q.constraint).holds)
                    expected.insert(t.case_id);
            ++total;
            agree += MatchRecognizeQuery(q.sql).run(rows) == expected;
        }
    }
    return {agree == total, fmt("%d logs, %d/%d violation queries return exactly the checker's cases", logs, agree, total)};
}

Outcome monotonicity() {
    Rng rng(4242);
    const int n = 200;
    int monotone = 0;
    std::size_t lost_traces = 0;
    std::map<std::string, std::pair<int, int>> by_op; // op -> (non-monotone, total)
    std::string example;
    for (int k = 0; k < n; ++k) {
        const int size = uniform(rng, 1, 4);
        auto m = random_matrix(rng, size);
        auto op = random_op(rng, m);
        auto relaxed = apply_op(m, op).first;
        auto before = generate_constraints(m), after = generate_constraints(relaxed);

        auto accepts = [](const ConstraintSet& cs, const std::vector<Activity>& t) {
            for (const auto& c : cs)
                if (!evaluate_constraint(t, c).holds)
                    return false;
            return true;
        };
        std::size_t lost = 0;
        for (const auto& t : all_traces(m.activities(), 6))
            if (accepts(before, t) && !accepts(after, t)) {
                if (lost == 0 && example.empty()) {
                    example = describe(op) + " rejects <";
                    for (std::size_t i = 0; i < t.size(); ++i)
                        example += (i ? "," : "") + t[i];
                    example += ">";
                }
                ++lost;
            }
        monotone += lost == 0;
        lost_traces += lost;
        auto& [bad, all] = by_op[std::string(op_name(op.kind))];
        bad += lost != 0;
        ++all;
    }
    std::string breakdown;
    for (const auto& [name, counts] : by_op)
        breakdown += fmt("%s%s %d/%d", breakdown.empty() ? "" : ", ", name.c_str(), counts.first, counts.second);
    return {monotone == n, fmt("%d/%d (matrix, op) pairs monotone; %zu previously accepted traces lost; "
                               "non-monotone by op: %s",
                               monotone, n, lost_traces, breakdown.c_str()) +
                               (example.empty() ? "" : "; e.g. " + example)};
}

Outcome matrix_invariants() {
    Rng rng(31337);
    const int n = 2000;
    int ok = 0;
    RelationMatrix m = random_matrix(rng, 5, 0);
    for (int k = 0; k < n; ++k) {
        if (k % 20 == 0)
            m = random_matrix(rng, uniform(rng, 1, 7), 0);
        auto [next, d] = apply_op(m, random_op(rng, m));
        bool good = revert(next, d) == m;
        for (std::size_t i = 0; i < next.size(); ++i) {
            good = good && allowed_on_diagonal(next.at(i, i));
            for (std::size_t j = 0; j < next.size(); ++j)
                good = good && next.at(j, i) == mirror(next.at(i, j));
        }
        ok += good;
        m = std::move(next);
    }
    return {ok == n, fmt("%d/%d op applications keep mirror symmetry and the diagonal alphabet", ok, n)};
}

Outcome scale() {
    Rng rng(8);
    const auto alphabet = letters(8);
    std::vector<LogCase> cases;
    for (int c = 0; c < 10'000; ++c)
        cases.push_back({"case" + std::to_string(c), random_trace(rng, alphabet, 10, 10)});
    const auto csv = to_csv(rng, cases);

    ConstraintSet cs;
    while (cs.size() < 10)
        cs.insert(random_constraint(rng, alphabet));

    const auto t0 = Clock::now();
    auto traces = parse_event_log(csv);
    auto report = check_log(traces, cs);
    const double s = seconds_since(t0);
    std::size_t events = 0;
    for (const auto& t : traces)
        events += t.events.size();
    return {events == 100'000 && traces.size() == 10'000 && s < 10.0,
            fmt("%zu events, %zu cases, %zu constraints parsed and checked in %.2f s (limit 10 s), rate %s", events,
                traces.size(), cs.size(), s, report.rate_text().c_str())};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"table3-reproduction", table3},
        {"table4-reproduction", table4},
        {"relaxation-scenario", scenario},
        {"df-oracle", df_oracle},
        {"checker-oracle", checker_oracle},
        {"sql-oracle", sql_oracle},
        {"relaxation-monotonicity", monotonicity},
        {"matrix-invariants", matrix_invariants},
        {"scale-smoke", scale},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
