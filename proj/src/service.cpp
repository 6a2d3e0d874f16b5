#include "zyn/service.hpp"

#include <httplib.h>

#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <regex>
#include <thread>
#include <vector>

#include "zyn/io.hpp"
#include "zyn/json_io.hpp"
#include "zyn/qd.hpp"
#include "zyn/selector.hpp"

namespace zyn::service {

using json = nlohmann::json;

namespace {

HttpReply error_reply(int status, const std::string& message) {
    return {status, json{{"error", {{"message", message}}}}.dump()};
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct ScoringRequest {
    std::vector<std::string> texts;
    BoNConfig bon;
};

// Throws Error (-> 400) on anything malformed.
ScoringRequest parse_scoring_request(const std::string& body, const ServiceConfig& cfg) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("body is not JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "body must be a JSON object");
    if (!j.contains("texts") || !j.at("texts").is_array())
        throw Error(ErrorCode::InvalidArgument, "'texts' must be an array of strings");

    ScoringRequest req;
    try {
        for (const auto& t : j.at("texts")) {
            if (!t.is_string()) throw Error(ErrorCode::InvalidArgument, "'texts' must contain strings");
            req.texts.push_back(t.get<std::string>());
        }
        if (req.texts.empty()) throw Error(ErrorCode::InvalidArgument, "'texts' is empty");
        if (req.texts.size() > cfg.max_request_texts) {
            throw Error(ErrorCode::InvalidArgument, std::to_string(req.texts.size()) +
                                                        " texts exceed max_request_texts = " +
                                                        std::to_string(cfg.max_request_texts));
        }
        req.bon.n = cfg.max_request_texts;
        req.bon.spec = cfg.default_spec;
        if (j.contains("variant")) req.bon.spec.variant = parse_variant(j.at("variant").get<std::string>());
        req.bon.spec.k_s = j.value("k_s", req.bon.spec.k_s);
        req.bon.spec.k_c = j.value("k_c", req.bon.spec.k_c);
        req.bon.ensemble = cfg.default_ensemble;
        if (j.contains("questions")) req.bon.ensemble.questions = parse_questions(j.at("questions"));
        req.bon.ensemble.normalize_weights =
            j.value("normalize_weights", req.bon.ensemble.normalize_weights);
        validate(req.bon);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, e.what());
    }
    return req;
}

json candidates_json(const std::vector<ScoredCandidate>& cands) {
    json rewards = json::array(), per_question = json::array(), failed = json::array(),
         errors = json::array();
    for (const auto& c : cands) {
        if (c.failed()) {
            rewards.push_back(nullptr);
            per_question.push_back(nullptr);
            failed.push_back(c.index);
            errors.push_back({{"index", c.index}, {"error", *c.failure}});
        } else {
            rewards.push_back(c.aggregate);
            per_question.push_back(c.per_question);
        }
    }
    return {{"rewards", rewards}, {"per_question", per_question}, {"failed", failed}, {"errors", errors}};
}

bool valid_run_id(const std::string& id) {
    static const std::regex pattern("[A-Za-z0-9_.-]{1,64}");
    return std::regex_match(id, pattern) && id != "." && id != "..";
}

}  // namespace

void validate(const ServiceConfig& cfg) {
    parse_listen_addr(cfg.listen_addr);
    validate(cfg.backend);
    validate(cfg.default_spec);
    validate(cfg.default_ensemble);
    if (cfg.max_request_texts < 1) throw Error(ErrorCode::InvalidConfig, "max_request_texts must be >= 1");
}

std::pair<std::string, int> parse_listen_addr(std::string_view addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == addr.size())
        throw Error(ErrorCode::InvalidConfig, "listen_addr must be host:port");
    int port = -1;
    try {
        std::size_t used = 0;
        const std::string port_text(addr.substr(colon + 1));
        port = std::stoi(port_text, &used);
        if (used != port_text.size()) port = -1;
    } catch (const std::exception&) {
        port = -1;
    }
    if (port < 0 || port > 65535) throw Error(ErrorCode::InvalidConfig, "bad port in listen_addr");
    return {std::string(addr.substr(0, colon)), port};
}

ServiceConfig service_config_from_json(const std::string& text) {
    ServiceConfig cfg;
    try {
        const json j = json::parse(text);
        cfg.listen_addr = j.value("listen_addr", cfg.listen_addr);
        if (j.contains("backend")) cfg.backend = j.at("backend").get<BackendConfig>();
        if (j.contains("default_spec")) cfg.default_spec = j.at("default_spec").get<RewardSpec>();
        if (j.contains("default_ensemble")) cfg.default_ensemble = j.at("default_ensemble").get<EnsembleSpec>();
        if (j.contains("log_path")) cfg.log_path = j.at("log_path").get<std::string>();
        cfg.max_request_texts = j.value("max_request_texts", cfg.max_request_texts);
        if (j.contains("qd_output_dir")) cfg.qd_output_dir = j.at("qd_output_dir").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, e.what());
    }
    apply_env_overrides(cfg.backend);
    validate(cfg);
    return cfg;
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
    return service_config_from_json(io::read_file(path));
}

struct RewardService::Impl {
    struct Run {
        std::string status = "queued";
        std::optional<qd::QdMetrics> metrics;
        std::string archive_path;
        std::string error;
        int failed_iterations = 0;
    };

    ServiceConfig cfg;
    LogitClient client;
    httplib::Server server;
    std::thread server_thread;

    std::mutex audit_mutex;
    std::ofstream audit;

    mutable std::mutex runs_mutex;
    std::map<std::string, Run> runs;
    std::vector<std::jthread> workers;
    long next_run = 0;

    Impl(ServiceConfig c, LogitClient cl) : cfg(std::move(c)), client(std::move(cl)) {}

    void append_audit(std::string_view endpoint, const std::string& request, const HttpReply& reply) {
        json rec;
        rec["ts"] = utc_timestamp();
        rec["endpoint"] = endpoint;
        rec["status"] = reply.status;
        try {
            rec["request"] = json::parse(request);
        } catch (const json::exception&) {
            rec["request_raw"] = request;
        }
        try {
            rec["response"] = json::parse(reply.body);
        } catch (const json::exception&) {
            rec["response_raw"] = reply.body;
        }
        std::lock_guard lock(audit_mutex);
        if (!audit.is_open()) {
            if (cfg.log_path.has_parent_path()) std::filesystem::create_directories(cfg.log_path.parent_path());
            audit.open(cfg.log_path, std::ios::app | std::ios::binary);
        }
        audit << rec.dump() << '\n';
        audit.flush();
    }

    void execute_run(const std::string& run_id, qd::QdConfig qcfg, GenerationBackendConfig gen,
                     std::uint64_t seed, std::stop_token stop) {
        set_status(run_id, "running");
        try {
            const auto generator = make_generator(gen);
            const auto dir = cfg.qd_output_dir / run_id;
            auto result = qd::run_search(qcfg, *generator, client, seed, {}, stop);
            std::string log;
            for (const auto& rec : result.log) log += qd::iteration_to_jsonl(rec) + "\n";
            io::write_file_atomic(dir / "run_log.jsonl", log);
            io::write_file_atomic(dir / "archive.json", qd::archive_to_json(result.archive, qcfg));
            io::write_file_atomic(dir / "metrics.json", qd::metrics_to_json(result.metrics));
            std::lock_guard lock(runs_mutex);
            auto& run = runs[run_id];
            run.status = "done";
            run.metrics = result.metrics;
            run.archive_path = (dir / "archive.json").string();
            run.failed_iterations = result.failed_iterations;
        } catch (const std::exception& e) {
            std::lock_guard lock(runs_mutex);
            auto& run = runs[run_id];
            run.status = "failed";
            run.error = e.what();
        }
    }

    void set_status(const std::string& run_id, std::string status) {
        std::lock_guard lock(runs_mutex);
        runs[run_id].status = std::move(status);
    }
};

RewardService::RewardService(ServiceConfig cfg)
    : RewardService(cfg, LogitClient::from_config(cfg.backend)) {}

RewardService::RewardService(ServiceConfig cfg, LogitClient client)
    : impl_(std::make_unique<Impl>(std::move(cfg), std::move(client))) {
    validate(impl_->cfg);
    auto route = [this](auto handler) {
        return [this, handler](const httplib::Request& req, httplib::Response& res) {
            const HttpReply reply = handler(req);
            res.status = reply.status;
            res.set_content(reply.body, "application/json");
        };
    };
    auto& s = impl_->server;
    s.Post("/v1/score", route([this](const httplib::Request& r) { return handle_score(r.body); }));
    s.Post("/v1/best_of_n", route([this](const httplib::Request& r) { return handle_best_of_n(r.body); }));
    s.Post("/v1/qd/runs", route([this](const httplib::Request& r) { return handle_qd_submit(r.body); }));
    s.Get(R"(/v1/qd/runs/([^/]+))",
          route([this](const httplib::Request& r) { return handle_qd_status(r.matches[1].str()); }));
    s.Get("/healthz", route([this](const httplib::Request&) { return handle_health(); }));
}

RewardService::~RewardService() {
    stop();
    std::vector<std::jthread> workers;
    {
        std::lock_guard lock(impl_->runs_mutex);
        workers = std::move(impl_->workers);
    }
    for (auto& w : workers) w.request_stop();
    // jthread destructors join.
}

const ServiceConfig& RewardService::config() const noexcept { return impl_->cfg; }

HttpReply RewardService::handle_score(const std::string& body) {
    HttpReply reply;
    try {
        const auto req = parse_scoring_request(body, impl_->cfg);
        const auto cands = score_candidates(req.texts, req.bon, impl_->client);
        const json out = candidates_json(cands);
        reply = out.at("failed").size() == cands.size()
                    ? HttpReply{502, json{{"error", {{"message", "every text failed to score"}}},
                                          {"errors", out.at("errors")}}
                                         .dump()}
                    : HttpReply{200, out.dump()};
    } catch (const Error& e) {
        reply = error_reply(400, e.what());
    }
    impl_->append_audit("/v1/score", body, reply);
    return reply;
}

HttpReply RewardService::handle_best_of_n(const std::string& body) {
    HttpReply reply;
    try {
        const auto req = parse_scoring_request(body, impl_->cfg);
        const auto cands = score_candidates(req.texts, req.bon, impl_->client);
        json out = candidates_json(cands);
        try {
            const auto& best = select_best(cands);
            out["best_index"] = best.index;
            out["best_text"] = best.text;
            reply = {200, out.dump()};
        } catch (const Error& e) {
            reply = {422, json{{"error", {{"message", e.what()}}}, {"errors", out.at("errors")}}.dump()};
        }
    } catch (const Error& e) {
        reply = error_reply(400, e.what());
    }
    impl_->append_audit("/v1/best_of_n", body, reply);
    return reply;
}

HttpReply RewardService::handle_qd_submit(const std::string& body) {
    json j;
    qd::QdConfig qcfg;
    GenerationBackendConfig gen;
    std::uint64_t seed = 0;
    std::string run_id;
    try {
        j = json::parse(body);
        if (!j.is_object() || !j.contains("config"))
            return error_reply(400, "body must be an object with a 'config'");
        qcfg = j.at("config").get<qd::QdConfig>();
        if (j.contains("generation")) gen = j.at("generation").get<GenerationBackendConfig>();
        validate(gen);
        seed = j.value("seed", std::uint64_t{0});
        run_id = j.value("run_id", std::string{});
    } catch (const json::exception& e) {
        return error_reply(400, e.what());
    } catch (const Error& e) {
        return error_reply(400, e.what());
    }

    std::lock_guard lock(impl_->runs_mutex);
    if (run_id.empty()) {
        do {
            run_id = "run-" + std::to_string(++impl_->next_run);
        } while (impl_->runs.contains(run_id));
    } else if (!valid_run_id(run_id)) {
        return error_reply(400, "run_id must match [A-Za-z0-9_.-]{1,64}");
    }
    if (impl_->runs.contains(run_id)) return error_reply(409, "run '" + run_id + "' already exists");
    impl_->runs[run_id] = {};
    impl_->workers.emplace_back([this, run_id, qcfg, gen, seed](std::stop_token stop) {
        impl_->execute_run(run_id, qcfg, gen, seed, stop);
    });
    return {202, json{{"run_id", run_id}, {"status", "queued"}}.dump()};
}

HttpReply RewardService::handle_qd_status(const std::string& run_id) const {
    std::lock_guard lock(impl_->runs_mutex);
    const auto it = impl_->runs.find(run_id);
    if (it == impl_->runs.end()) return error_reply(404, "unknown run '" + run_id + "'");
    const auto& run = it->second;
    json out{{"run_id", run_id}, {"status", run.status}};
    if (run.metrics) {
        out["metrics"] = {{"cells_filled", run.metrics->cells_filled},
                          {"qd_score", run.metrics->qd_score},
                          {"avg_qd_score", run.metrics->avg_qd_score}};
        out["archive_path"] = run.archive_path;
        out["failed_iterations"] = run.failed_iterations;
    }
    if (!run.error.empty()) out["error"] = run.error;
    return {200, out.dump()};
}

HttpReply RewardService::handle_health() const {
    return {200, json{{"status", "ok"}, {"backend_reachable", impl_->client.backend_reachable()}}.dump()};
}

int RewardService::start() {
    const auto [host, port] = parse_listen_addr(impl_->cfg.listen_addr);
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound <= 0) throw Error(ErrorCode::InvalidConfig, "cannot bind " + impl_->cfg.listen_addr);
    impl_->server_thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void RewardService::listen_blocking() {
    const auto [host, port] = parse_listen_addr(impl_->cfg.listen_addr);
    if (!impl_->server.listen(host, port))
        throw Error(ErrorCode::InvalidConfig, "cannot listen on " + impl_->cfg.listen_addr);
}

void RewardService::stop() {
    impl_->server.stop();
    if (impl_->server_thread.joinable()) impl_->server_thread.join();
}

}  // namespace zyn::service
