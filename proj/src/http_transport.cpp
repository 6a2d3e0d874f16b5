#include "zyn/http_transport.hpp"

#include <httplib.h>

#include <random>
#include <thread>

#include "zyn/error.hpp"

namespace zyn::http {

namespace {

void configure(httplib::Client& client, std::chrono::milliseconds timeout) {
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt) {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    const auto base = policy.backoff_base.count() << std::min(attempt, 16);
    std::uniform_int_distribution<long long> jitter(0, std::max<long long>(base / 2, 0));
    return std::chrono::milliseconds(base + jitter(rng));
}

}  // namespace

Endpoint parse_base_url(std::string_view url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos || scheme_end == 0)
        throw Error(ErrorCode::InvalidConfig, "base_url needs a scheme: '" + std::string(url) + "'");
    const auto path_start = url.find('/', scheme_end + 3);
    Endpoint ep;
    ep.scheme_host_port = std::string(url.substr(0, path_start));
    if (path_start != std::string_view::npos) {
        ep.path_prefix = std::string(url.substr(path_start));
        while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();
    }
    if (ep.scheme_host_port.size() <= scheme_end + 3)
        throw Error(ErrorCode::InvalidConfig, "base_url has no host: '" + std::string(url) + "'");
    return ep;
}

std::string post_json(const Endpoint& endpoint, const std::string& path, const std::string& body,
                      const std::optional<std::string>& api_key, const RetryPolicy& policy) {
    const std::string full_path = endpoint.path_prefix + path;
    std::string last_failure;
    for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(backoff_delay(policy, attempt - 1));

        httplib::Client client(endpoint.scheme_host_port);
        configure(client, policy.timeout);
        if (api_key && !api_key->empty()) client.set_bearer_token_auth(*api_key);

        auto res = client.Post(full_path, body, "application/json");
        if (!res) {
            last_failure = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 200 && res->status < 300) return res->body;
        if (res->status >= 400 && res->status < 500) {
            throw Error(ErrorCode::BackendProtocolError,
                        "backend rejected request with HTTP " + std::to_string(res->status) + ": " +
                            res->body.substr(0, 200));
        }
        last_failure = "HTTP " + std::to_string(res->status);
    }
    throw Error(ErrorCode::BackendTimeout, "giving up after " + std::to_string(policy.max_retries + 1) +
                                               " attempt(s), last failure: " + last_failure);
}

bool probe(const Endpoint& endpoint, std::chrono::milliseconds timeout) {
    httplib::Client client(endpoint.scheme_host_port);
    configure(client, timeout);
    auto res = client.Get(endpoint.path_prefix + "/v1/models");
    return static_cast<bool>(res);
}

}  // namespace zyn::http
