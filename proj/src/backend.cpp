#include "zyn/backend.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>
#include <thread>

#include "zyn/http_transport.hpp"
#include "zyn/mock.hpp"

namespace zyn {

using json = nlohmann::json;

namespace {

// Slack for backends that print tiny positive log-probabilities from rounding.
constexpr double kLogprobSlack = 1e-6;

class GateGuard {
public:
    explicit GateGuard(std::counting_semaphore<>& gate) : gate_(gate) { gate_.acquire(); }
    ~GateGuard() { gate_.release(); }
    GateGuard(const GateGuard&) = delete;
    GateGuard& operator=(const GateGuard&) = delete;

private:
    std::counting_semaphore<>& gate_;
};

class HttpLogprobSource final : public LogprobSource {
public:
    explicit HttpLogprobSource(BackendConfig cfg)
        : cfg_(std::move(cfg)), endpoint_(http::parse_base_url(cfg_.base_url)) {}

    LogprobResponse first_token_scores(const PromptRender& prompt) const override {
        const json request = {
            {"model", cfg_.model_id},
            {"prompt", prompt.text},
            {"max_tokens", 1},
            {"logprobs", cfg_.top_k},
        };
        const http::RetryPolicy policy{cfg_.max_retries, cfg_.timeout, cfg_.backoff_base};
        const std::string body =
            http::post_json(endpoint_, "/v1/completions", request.dump(), cfg_.api_key, policy);
        return parse_completions_logprobs(body, cfg_.scores_are_logprobs);
    }

    bool reachable() const override {
        return http::probe(endpoint_, std::min(cfg_.timeout, std::chrono::milliseconds{2000}));
    }

private:
    BackendConfig cfg_;
    http::Endpoint endpoint_;
};

}  // namespace

void validate(const BackendConfig& cfg) {
    if (cfg.timeout.count() <= 0) throw Error(ErrorCode::InvalidConfig, "timeout must be > 0");
    if (cfg.max_retries < 0) throw Error(ErrorCode::InvalidConfig, "max_retries must be >= 0");
    if (cfg.max_in_flight < 1) throw Error(ErrorCode::InvalidConfig, "max_in_flight must be >= 1");
    if (cfg.top_k < 2) throw Error(ErrorCode::InvalidConfig, "top_k must be >= 2");
    if (cfg.backoff_base.count() < 0)
        throw Error(ErrorCode::InvalidConfig, "backoff_base must be >= 0");
    if (cfg.yes_surface_forms.empty() || cfg.no_surface_forms.empty())
        throw Error(ErrorCode::InvalidConfig, "surface-form lists must be non-empty");
    std::set<std::string> yes;
    for (const auto& f : cfg.yes_surface_forms) yes.insert(normalize_surface(f));
    for (const auto& f : cfg.no_surface_forms) {
        if (yes.contains(normalize_surface(f)))
            throw Error(ErrorCode::InvalidConfig, "surface form '" + f + "' is both yes and no");
    }
    if (!cfg.mock && cfg.base_url.empty())
        throw Error(ErrorCode::InvalidConfig, "base_url is required unless the mock is used");
    if (!cfg.mock) http::parse_base_url(cfg.base_url);
}

void apply_env_overrides(BackendConfig& cfg) {
    if (const char* url = std::getenv("ZYN_BACKEND_URL"); url && *url) {
        cfg.base_url = url;
        cfg.mock = false;
    }
    if (const char* key = std::getenv("ZYN_API_KEY"); key && *key) cfg.api_key = key;
    if (const char* model = std::getenv("ZYN_MODEL_ID"); model && *model) cfg.model_id = model;
}

std::string normalize_surface(std::string_view token) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!token.empty() && is_space(token.front())) token.remove_prefix(1);
    while (!token.empty() && is_space(token.back())) token.remove_suffix(1);
    std::string out(token);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

LogitPair resolve_logits(const LogprobResponse& response, const BackendConfig& cfg) {
    std::set<std::string> yes_forms, no_forms;
    for (const auto& f : cfg.yes_surface_forms) yes_forms.insert(normalize_surface(f));
    for (const auto& f : cfg.no_surface_forms) no_forms.insert(normalize_surface(f));

    constexpr double kNone = -std::numeric_limits<double>::infinity();
    double v_yes = kNone;
    double v_no = kNone;
    for (const auto& [token, score] : response.top_tokens) {
        const std::string norm = normalize_surface(token);
        if (yes_forms.contains(norm)) v_yes = std::max(v_yes, score);
        if (no_forms.contains(norm)) v_no = std::max(v_no, score);
    }
    if (v_yes == kNone || v_no == kNone) {
        std::string listing;
        for (const auto& t : response.top_tokens) {
            if (!listing.empty()) listing += ", ";
            listing += "'" + t.token + "'=" + std::to_string(t.score);
        }
        const char* missing = v_yes == kNone && v_no == kNone ? "neither Yes nor No"
                              : v_yes == kNone                ? "no Yes token"
                                                              : "no No token";
        throw TokenNotFoundError(std::string(missing) + " among top-" +
                                     std::to_string(response.top_tokens.size()) + " [" + listing +
                                     "]",
                                 response.top_tokens);
    }
    return {v_yes, v_no};
}

LogprobResponse parse_completions_logprobs(const std::string& body, bool scores_are_logprobs) {
    LogprobResponse out;
    out.raw_body = body;
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BackendProtocolError, std::string("response is not JSON: ") + e.what());
    }
    try {
        const auto& positions = doc.at("choices").at(0).at("logprobs").at("top_logprobs");
        if (!positions.is_array() || positions.empty())
            throw Error(ErrorCode::BackendProtocolError, "top_logprobs is empty");
        const auto& first = positions.at(0);
        if (!first.is_object())
            throw Error(ErrorCode::BackendProtocolError, "top_logprobs[0] is not an object");
        for (const auto& [token, value] : first.items()) {
            if (!value.is_number())
                throw Error(ErrorCode::BackendProtocolError, "score for '" + token + "' is not a number");
            const double score = value.get<double>();
            if (!std::isfinite(score))
                throw Error(ErrorCode::BackendProtocolError, "score for '" + token + "' is not finite");
            if (scores_are_logprobs && score > kLogprobSlack)
                throw Error(ErrorCode::BackendProtocolError,
                            "log-probability for '" + token + "' is positive");
            out.top_tokens.push_back({token, score});
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BackendProtocolError, std::string("unexpected response shape: ") + e.what());
    }
    return out;
}

std::shared_ptr<const LogprobSource> make_http_source(const BackendConfig& cfg) {
    return std::make_shared<HttpLogprobSource>(cfg);
}

LogitClient::LogitClient(BackendConfig cfg, std::shared_ptr<const LogprobSource> source)
    : cfg_(std::move(cfg)), source_(std::move(source)) {
    if (cfg_.max_in_flight < 1) throw Error(ErrorCode::InvalidConfig, "max_in_flight must be >= 1");
    if (!source_) throw Error(ErrorCode::InvalidConfig, "logprob source is null");
    gate_ = std::make_shared<std::counting_semaphore<>>(cfg_.max_in_flight);
}

LogitClient LogitClient::from_config(const BackendConfig& cfg) {
    validate(cfg);
    if (cfg.mock) return LogitClient(cfg, std::make_shared<MockLogprobSource>());
    return LogitClient(cfg, make_http_source(cfg));
}

LogitPair LogitClient::fetch_logits(std::string_view o, const Question& q) const {
    const PromptRender prompt = render_prompt(o, q);
    LogprobResponse response;
    {
        GateGuard guard(*gate_);
        response = source_->first_token_scores(prompt);
    }
    return resolve_logits(response, cfg_);
}

std::vector<Outcome<LogitPair>> LogitClient::fetch_logits_batch(
    std::span<const ScoringItem> items) const {
    std::vector<std::optional<Outcome<LogitPair>>> slots(items.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < items.size(); i = next++) {
            try {
                slots[i].emplace(fetch_logits(items[i].text, items[i].question));
            } catch (const Error& e) {
                slots[i].emplace(e);
            } catch (const std::exception& e) {
                slots[i].emplace(Error(ErrorCode::BackendProtocolError, e.what()));
            }
        }
    };

    const std::size_t n_workers =
        std::min<std::size_t>(items.size(), static_cast<std::size_t>(cfg_.max_in_flight));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }

    std::vector<Outcome<LogitPair>> out;
    out.reserve(items.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

bool LogitClient::backend_reachable() const {
    try {
        return source_->reachable();
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace zyn
