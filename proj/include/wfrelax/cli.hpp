#pragma once

// Batch front-end. Subcommands:
//   derive      --net N.pnml               -> relation matrix
//   relax       --matrix M --script S      -> relation matrix
//   constraints --matrix M                 -> constraint list
//   sql         --constraints C --mode m   -> SQL script
//   check       --constraints C --log L    -> conformance rate (+ report with --out)
//   serve       --port P                   -> HTTP session service
// Exit status: 0 success, 1 validation error, 2 usage error.

#include "wfrelax/checker.hpp"
#include "wfrelax/constraints.hpp"
#include "wfrelax/error.hpp"
#include "wfrelax/pipeline.hpp"
#include "wfrelax/relaxation.hpp"
#include "wfrelax/service.hpp"
#include "wfrelax/sqlgen.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace wfrelax {

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::MalformedDocument, "cannot open file", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline nlohmann::json read_json(const std::string& path) {
    auto j = nlohmann::json::parse(read_file(path), nullptr, false);
    if (j.is_discarded())
        fail(ErrorCode::MalformedDocument, "not valid JSON");
    return j;
}

inline void write_output(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f)
        fail(ErrorCode::MalformedDocument, "cannot write file", path);
    f << text;
}

/// Runs `f` with `path` as the context shown in error messages.
template <class F>
auto with_file(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.what(), e.detail());
    }
}

} // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Compile workflow nets into relaxable Declare constraints and SQL conformance queries"};
    app.require_subcommand(1);

    std::string net_path, matrix_path, script_path, constraints_path, log_path, out_path, mode_name_ = "paper";
    std::string host = "127.0.0.1";
    std::size_t state_limit = default_state_limit;
    int port = 8080;

    auto* derive = app.add_subcommand("derive", "derive the relation matrix of a sound free-choice net");
    derive->add_option("--net", net_path, "PNML file")->required()->check(CLI::ExistingFile);
    derive->add_option("--state-limit", state_limit, "maximum number of reachable markings");
    derive->add_option("--out", out_path, "output file (default: stdout)");

    auto* relax = app.add_subcommand("relax", "replay a relaxation script on a matrix");
    relax->add_option("--matrix", matrix_path, "matrix file")->required()->check(CLI::ExistingFile);
    relax->add_option("--script", script_path, "relaxation script file")->required()->check(CLI::ExistingFile);
    relax->add_option("--out", out_path, "output file (default: stdout)");

    auto* constraints = app.add_subcommand("constraints", "generate Declare constraints from a matrix");
    constraints->add_option("--matrix", matrix_path, "matrix file")->required()->check(CLI::ExistingFile);
    constraints->add_option("--out", out_path, "output file (default: stdout)");

    auto* sql = app.add_subcommand("sql", "emit MATCH_RECOGNIZE queries for a constraint file");
    sql->add_option("--constraints", constraints_path, "constraint file")->required()->check(CLI::ExistingFile);
    sql->add_option("--mode", mode_name_, "paper | violation")->check(CLI::IsMember({"paper", "violation"}));
    sql->add_option("--out", out_path, "output file (default: stdout)");

    auto* check = app.add_subcommand("check", "check an event log against a constraint file");
    check->add_option("--constraints", constraints_path, "constraint file")->required()->check(CLI::ExistingFile);
    check->add_option("--log", log_path, "CSV event log")->required()->check(CLI::ExistingFile);
    check->add_option("--out", out_path, "write the full report (JSON) here");

    auto* serve = app.add_subcommand("serve", "start the HTTP session service");
    serve->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
    serve->add_option("--host", host, "bind address");
    serve->add_option("--state-limit", state_limit, "maximum number of reachable markings");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 2;
    }

    auto dump = [](const nlohmann::json& j) { return j.dump(2) + "\n"; };

    try {
        if (*derive) {
            auto model = detail::with_file(net_path, [&] { return derive_model(detail::read_file(net_path), state_limit); });
            detail::write_output(out_path, dump(to_json(model.matrix)), out);
        } else if (*relax) {
            auto m = detail::with_file(matrix_path, [&] { return matrix_from_json(detail::read_json(matrix_path)); });
            auto s = detail::with_file(script_path, [&] { return script_from_json(detail::read_json(script_path)); });
            auto relaxed = detail::with_file(script_path, [&] { return replay(m, s); });
            detail::write_output(out_path, dump(to_json(relaxed)), out);
        } else if (*constraints) {
            auto m = detail::with_file(matrix_path, [&] { return matrix_from_json(detail::read_json(matrix_path)); });
            detail::write_output(out_path, dump(to_json(generate_constraints(m))), out);
        } else if (*sql) {
            auto cs = detail::with_file(constraints_path,
                                        [&] { return constraints_from_json(detail::read_json(constraints_path)); });
            detail::write_output(out_path, render_bundle(cs, *parse_mode(mode_name_)).script(), out);
        } else if (*check) {
            auto cs = detail::with_file(constraints_path,
                                        [&] { return constraints_from_json(detail::read_json(constraints_path)); });
            auto traces = detail::with_file(log_path, [&] { return parse_event_log(detail::read_file(log_path)); });
            auto report = check_log(traces, cs);
            if (!out_path.empty())
                detail::write_output(out_path, dump(to_json(report)), out);
            out << "conformance rate: " << report.rate_text() << " (" << report.conforming << "/"
                << report.traces.size() << " traces)\n";
        } else if (*serve) {
            SessionStore store(state_limit);
            HttpService service(store);
            err << "listening on http://" << host << ":" << port << "\n";
            if (!service.listen(host, port)) {
                err << "error: cannot listen on " << host << ":" << port << "\n";
                return 1;
            }
        }
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what();
        if (!e.detail().empty())
            err << " [" << e.detail() << "]";
        err << "\n";
        return 1;
    }
    return 0;
}

} // namespace wfrelax
