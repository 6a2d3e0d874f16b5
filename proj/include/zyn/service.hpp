#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include "zyn/backend.hpp"
#include "zyn/reward.hpp"

namespace zyn::service {

struct ServiceConfig {
    std::string listen_addr = "127.0.0.1:8080";
    BackendConfig backend;
    RewardSpec default_spec;
    EnsembleSpec default_ensemble{{{"Is this movie review positive?"}}, false};
    std::filesystem::path log_path = "zyn_audit.jsonl";
    std::size_t max_request_texts = 256;
    std::filesystem::path qd_output_dir = "qd_runs";
};

void validate(const ServiceConfig& cfg);

/// "host:port" -> (host, port). Port 0 asks for any free port.
std::pair<std::string, int> parse_listen_addr(std::string_view addr);

/// JSON config file with the ServiceConfig fields; environment overrides for
/// the backend are applied afterwards.
ServiceConfig load_service_config(const std::filesystem::path& path);
ServiceConfig service_config_from_json(const std::string& text);

struct HttpReply {
    int status = 200;
    std::string body;
};

/// Scoring, best-of-N and QD endpoints over one shared LogitClient.
///
///   POST /v1/score          {texts, questions?, variant?, k_s?, k_c?, normalize_weights?}
///   POST /v1/best_of_n      same body
///   POST /v1/qd/runs        {run_id?, config, generation, seed?}  -> 202 {run_id}
///   GET  /v1/qd/runs/{id}   {status, metrics?, archive_path?}
///   GET  /healthz           {status: "ok", backend_reachable}
class RewardService {
public:
    explicit RewardService(ServiceConfig cfg);
    RewardService(ServiceConfig cfg, LogitClient client);
    ~RewardService();
    RewardService(const RewardService&) = delete;
    RewardService& operator=(const RewardService&) = delete;

    HttpReply handle_score(const std::string& body);
    HttpReply handle_best_of_n(const std::string& body);
    HttpReply handle_qd_submit(const std::string& body);
    HttpReply handle_qd_status(const std::string& run_id) const;
    HttpReply handle_health() const;

    /// Binds listen_addr and serves on a background thread; returns the port.
    int start();
    /// Serves on the calling thread until stop().
    void listen_blocking();
    void stop();

    const ServiceConfig& config() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace zyn::service
