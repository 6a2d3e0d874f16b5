#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zyn/error.hpp"
#include "zyn/prompt.hpp"
#include "zyn/reward.hpp"

namespace zyn {

struct BackendConfig {
    bool mock = false;  // serve scores from the in-process keyword mock
    std::string base_url;
    std::optional<std::string> api_key;
    std::string model_id = "default";
    std::chrono::milliseconds timeout{10'000};
    int max_retries = 2;
    std::chrono::milliseconds backoff_base{50};
    int max_in_flight = 8;
    int top_k = 20;  // number of first-token alternatives requested
    // True when the backend reports normalized log-probabilities (all <= 0)
    // rather than raw logits.
    bool scores_are_logprobs = false;
    std::vector<std::string> yes_surface_forms{"Yes", "yes", "▁Yes", " Yes"};
    std::vector<std::string> no_surface_forms{"No", "no", "▁No", " No"};
};

void validate(const BackendConfig& cfg);

/// Overrides base_url, api_key and model_id from ZYN_BACKEND_URL, ZYN_API_KEY
/// and ZYN_MODEL_ID. A URL override switches the config off the mock.
void apply_env_overrides(BackendConfig& cfg);

struct TokenScore {
    std::string token;
    double score = 0.0;
};

/// First generated position as reported by the backend.
struct LogprobResponse {
    std::vector<TokenScore> top_tokens;
    std::string raw_body;
};

/// Thrown when neither or only one of the Yes/No surface forms is present.
class TokenNotFoundError : public Error {
public:
    TokenNotFoundError(const std::string& message, std::vector<TokenScore> top_tokens)
        : Error(ErrorCode::TokenNotFound, message), top_tokens_(std::move(top_tokens)) {}

    const std::vector<TokenScore>& top_tokens() const noexcept { return top_tokens_; }

private:
    std::vector<TokenScore> top_tokens_;
};

/// Case-insensitive, whitespace-stripped form used for surface matching.
std::string normalize_surface(std::string_view token);

/// Picks v_yes (v_no) as the maximum score over tokens matching a yes (no)
/// surface form.
LogitPair resolve_logits(const LogprobResponse& response, const BackendConfig& cfg);

/// Anything that can report first-token scores for a rendered prompt.
/// Implementations must be safe to call from several threads at once.
class LogprobSource {
public:
    virtual ~LogprobSource() = default;
    virtual LogprobResponse first_token_scores(const PromptRender& prompt) const = 0;
    virtual bool reachable() const = 0;
};

/// Completions-protocol source: POST {base_url}/v1/completions.
std::shared_ptr<const LogprobSource> make_http_source(const BackendConfig& cfg);

/// Parses a completions response body into the first position's top tokens.
LogprobResponse parse_completions_logprobs(const std::string& body, bool scores_are_logprobs);

struct ScoringItem {
    std::string text;
    Question question;
};

/// Yes/No logit client. Shareable across threads; at most max_in_flight
/// requests are outstanding at any time across all callers.
class LogitClient {
public:
    LogitClient(BackendConfig cfg, std::shared_ptr<const LogprobSource> source);

    /// Builds a mock- or HTTP-backed client from the config.
    static LogitClient from_config(const BackendConfig& cfg);

    LogitPair fetch_logits(std::string_view o, const Question& q) const;

    /// Results are positionally aligned with items; failures are per item.
    std::vector<Outcome<LogitPair>> fetch_logits_batch(std::span<const ScoringItem> items) const;

    bool backend_reachable() const;

    const BackendConfig& config() const noexcept { return cfg_; }

private:
    BackendConfig cfg_;
    std::shared_ptr<const LogprobSource> source_;
    std::shared_ptr<std::counting_semaphore<>> gate_;
};

}  // namespace zyn
