#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace zyn::http {

struct Endpoint {
    std::string scheme_host_port;  // e.g. "http://127.0.0.1:8000"
    std::string path_prefix;       // e.g. "" or "/api"
};

Endpoint parse_base_url(std::string_view url);

struct RetryPolicy {
    int max_retries = 2;
    std::chrono::milliseconds timeout{10'000};
    std::chrono::milliseconds backoff_base{50};
};

/// POSTs a JSON body and returns the response body of the first 2xx answer.
/// Timeouts, transport failures and 5xx are retried with jittered exponential
/// backoff; a 4xx is a BackendProtocolError and is not retried. Exhausted
/// retries raise BackendTimeout.
std::string post_json(const Endpoint& endpoint, const std::string& path, const std::string& body,
                      const std::optional<std::string>& api_key, const RetryPolicy& policy);

/// True when anything answers a GET on {prefix}/v1/models.
bool probe(const Endpoint& endpoint, std::chrono::milliseconds timeout);

}  // namespace zyn::http
