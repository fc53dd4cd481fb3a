#pragma once

// In-memory relaxation sessions and their HTTP binding.
//
//   POST /sessions                    PNML body (or {"pnml": ..., "state_limit": n})
//   GET  /sessions/{id}/matrix
//   POST /sessions/{id}/ops           {"op": ..., "a": ..., "b": ...}
//   POST /sessions/{id}/undo
//   GET  /sessions/{id}/script
//   GET  /sessions/{id}/constraints
//   GET  /sessions/{id}/sql?mode=paper|violation
//   POST /sessions/{id}/log           CSV event log
//   POST /sessions/{id}/check         optional CSV body, else the stored log
//
// Errors are {"code", "message", "detail"}.

#include "wfrelax/checker.hpp"
#include "wfrelax/constraints.hpp"
#include "wfrelax/error.hpp"
#include "wfrelax/pipeline.hpp"
#include "wfrelax/relaxation.hpp"
#include "wfrelax/sqlgen.hpp"

#include "httplib.h"
#include "json.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

namespace wfrelax {

class SessionStore {
public:
    explicit SessionStore(std::size_t state_limit = default_state_limit) : state_limit_(state_limit) {}

    struct Created {
        std::string id;
        RelationMatrix matrix;
    };

    Created create(std::string_view pnml, std::optional<std::size_t> state_limit = std::nullopt) {
        const auto limit = state_limit.value_or(state_limit_);
        auto model = derive_model(pnml, limit);
        auto s = std::make_shared<Session>(std::string(pnml), limit, model.matrix, model.matrix);
        std::unique_lock lock(mutex_);
        std::string id;
        do
            id = new_id();
        while (sessions_.contains(id));
        sessions_.emplace(id, s);
        return {id, std::move(model.matrix)};
    }

    RelationMatrix matrix(const std::string& id) const {
        return read(id, [](const Session& s) { return s.current; });
    }

    std::size_t history_length(const std::string& id) const {
        return read(id, [](const Session& s) { return s.history.size(); });
    }

    std::pair<RelationMatrix, MatrixDiff> apply(const std::string& id, const RelaxationOp& op) {
        return write(id, [&](Session& s) {
            auto [next, d] = apply_op(s.current, op);
            s.history.push_back({op, next, d});
            s.current = next;
            return std::pair{std::move(next), std::move(d)};
        });
    }

    RelationMatrix undo(const std::string& id) {
        return write(id, [](Session& s) {
            s.current = wfrelax::undo(s.history);
            return s.current;
        });
    }

    RelaxationScript script(const std::string& id) const {
        return read(id, [](const Session& s) {
            RelaxationScript out;
            for (const auto& h : s.history)
                out.push_back(h.op);
            return out;
        });
    }

    RelationMatrix base_matrix(const std::string& id) const {
        return read(id, [](const Session& s) { return s.base; });
    }

    ConstraintSet constraints(const std::string& id) const { return generate_constraints(matrix(id)); }

    QueryBundle sql(const std::string& id, SqlMode mode) const { return render_bundle(constraints(id), mode); }

    /// Stores the log for later checks; returns the number of traces.
    std::size_t load_log(const std::string& id, std::string_view csv) {
        auto traces = parse_event_log(csv);
        return write(id, [&](Session& s) {
            s.log = std::move(traces);
            return s.log->size();
        });
    }

    /// Checks `csv` when given, otherwise the stored log.
    ConformanceReport check(const std::string& id, std::optional<std::string_view> csv = std::nullopt) const {
        auto [current, stored] = read(id, [](const Session& s) { return std::pair{s.current, s.log}; });
        std::vector<Trace> traces;
        if (csv)
            traces = parse_event_log(*csv);
        else if (stored)
            traces = std::move(*stored);
        else
            fail(ErrorCode::NoLog, "no event log loaded for this session");
        return check_log(traces, generate_constraints(current));
    }

    /// {pnml, state_limit, script}: enough to rebuild the session elsewhere.
    nlohmann::json snapshot(const std::string& id) const {
        return read(id, [](const Session& s) {
            RelaxationScript ops;
            for (const auto& h : s.history)
                ops.push_back(h.op);
            return nlohmann::json{{"pnml", s.pnml}, {"state_limit", s.state_limit}, {"script", to_json(ops)}};
        });
    }

    std::string restore(const nlohmann::json& snap) {
        if (!snap.is_object() || !snap.contains("pnml") || !snap.at("pnml").is_string())
            fail(ErrorCode::MalformedDocument, "snapshot needs a 'pnml' string");
        std::optional<std::size_t> limit;
        if (snap.contains("state_limit"))
            limit = snap.at("state_limit").get<std::size_t>();
        auto script = snap.contains("script") ? script_from_json(snap.at("script")) : RelaxationScript{};
        auto created = create(snap.at("pnml").get<std::string>(), limit);
        for (const auto& op : script)
            apply(created.id, op);
        return created.id;
    }

private:
    struct Session {
        std::string pnml;
        std::size_t state_limit;
        RelationMatrix base;
        RelationMatrix current;
        std::vector<HistoryEntry> history;
        std::optional<std::vector<Trace>> log;
        mutable std::mutex mutex;
    };

    std::shared_ptr<Session> find(const std::string& id) const {
        std::shared_lock lock(mutex_);
        auto it = sessions_.find(id);
        if (it == sessions_.end())
            fail(ErrorCode::UnknownSession, "unknown session '" + id + "'", id);
        return it->second;
    }

    template <class F>
    std::invoke_result_t<F, const Session&> read(const std::string& id, F&& f) const {
        auto s = find(id);
        std::lock_guard lock(s->mutex);
        return f(static_cast<const Session&>(*s));
    }

    template <class F>
    std::invoke_result_t<F, Session&> write(const std::string& id, F&& f) {
        auto s = find(id);
        std::lock_guard lock(s->mutex);
        return f(*s);
    }

    std::string new_id() {
        static constexpr char hex[] = "0123456789abcdef";
        std::string id;
        for (int i = 0; i < 2; ++i) {
            auto v = rng_();
            for (int k = 0; k < 16; ++k, v >>= 4)
                id += hex[v & 0xF];
        }
        return id;
    }

    std::size_t state_limit_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::mt19937_64 rng_{std::random_device{}()};
};

// ---------------------------------------------------------------------------

inline int http_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::UnknownSession: return 404;
    case ErrorCode::PreconditionViolated:
    case ErrorCode::EmptyHistory: return 409;
    case ErrorCode::StateSpaceExceeded:
    case ErrorCode::UnsoundNet:
    case ErrorCode::NotFreeChoice: return 422;
    default: return 400;
    }
}

class HttpService {
public:
    explicit HttpService(SessionStore& store) : store_(store) { routes(); }

    httplib::Server& server() { return server_; }

    bool listen(const std::string& host, int port) { return server_.listen(host, port); }
    void stop() { server_.stop(); }

private:
    using Req = httplib::Request;
    using Res = httplib::Response;

    static void send(Res& res, const nlohmann::json& body, int status = 200) {
        res.status = status;
        res.set_content(body.dump(2), "application/json");
    }

    /// Runs `f`, turning library errors into {code, message, detail} replies.
    template <class F>
    static void guarded(Res& res, F&& f) {
        try {
            f();
        } catch (const Error& e) {
            send(res, {{"code", to_string(e.code())}, {"message", e.what()}, {"detail", e.detail()}},
                 http_status(e.code()));
        } catch (const nlohmann::json::exception& e) {
            send(res, {{"code", "MalformedDocument"}, {"message", e.what()}, {"detail", ""}}, 400);
        }
    }

    static nlohmann::json parse_body(const Req& req) {
        auto j = nlohmann::json::parse(req.body, nullptr, false);
        if (j.is_discarded())
            fail(ErrorCode::MalformedDocument, "request body is not valid JSON");
        return j;
    }

    void routes() {
        server_.Post("/sessions", [this](const Req& req, Res& res) {
            guarded(res, [&] {
                std::string pnml = req.body;
                std::optional<std::size_t> limit;
                auto first = req.body.find_first_not_of(" \t\r\n");
                if (first != std::string::npos && req.body[first] == '{') {
                    auto j = parse_body(req);
                    if (!j.contains("pnml") || !j.at("pnml").is_string())
                        fail(ErrorCode::MalformedDocument, "body needs a 'pnml' string");
                    pnml = j.at("pnml").get<std::string>();
                    if (j.contains("state_limit"))
                        limit = j.at("state_limit").get<std::size_t>();
                }
                auto created = store_.create(pnml, limit);
                auto body = to_json(created.matrix);
                body["id"] = created.id;
                send(res, body, 201);
            });
        });

        server_.Get(R"(/sessions/([^/]+)/matrix)", [this](const Req& req, Res& res) {
            guarded(res, [&] { send(res, to_json(store_.matrix(req.matches[1]))); });
        });

        server_.Post(R"(/sessions/([^/]+)/ops)", [this](const Req& req, Res& res) {
            guarded(res, [&] {
                const std::string id = req.matches[1];
                auto op = op_from_json(parse_body(req));
                auto [m, d] = store_.apply(id, op);
                send(res, {{"matrix", to_json(m)}, {"diff", to_json(d)}});
            });
        });

        server_.Post(R"(/sessions/([^/]+)/undo)", [this](const Req& req, Res& res) {
            guarded(res, [&] { send(res, {{"matrix", to_json(store_.undo(req.matches[1]))}}); });
        });

        server_.Get(R"(/sessions/([^/]+)/script)", [this](const Req& req, Res& res) {
            guarded(res, [&] { send(res, to_json(store_.script(req.matches[1]))); });
        });

        server_.Get(R"(/sessions/([^/]+)/constraints)", [this](const Req& req, Res& res) {
            guarded(res, [&] { send(res, to_json(store_.constraints(req.matches[1]))); });
        });

        server_.Get(R"(/sessions/([^/]+)/sql)", [this](const Req& req, Res& res) {
            guarded(res, [&] {
                auto name = req.has_param("mode") ? req.get_param_value("mode") : std::string("paper");
                auto mode = parse_mode(name);
                if (!mode)
                    fail(ErrorCode::MalformedDocument, "mode must be 'paper' or 'violation'", name);
                send(res, to_json(store_.sql(req.matches[1], *mode)));
            });
        });

        server_.Post(R"(/sessions/([^/]+)/log)", [this](const Req& req, Res& res) {
            guarded(res, [&] { send(res, {{"traces", store_.load_log(req.matches[1], req.body)}}); });
        });

        server_.Post(R"(/sessions/([^/]+)/check)", [this](const Req& req, Res& res) {
            guarded(res, [&] {
                std::optional<std::string_view> csv;
                if (req.body.find_first_not_of(" \t\r\n") != std::string::npos)
                    csv = req.body;
                send(res, to_json(store_.check(req.matches[1], csv)));
            });
        });
    }

    SessionStore& store_;
    httplib::Server server_;
};

} // namespace wfrelax
