#include "zyn/generation.hpp"

#include <json.hpp>

#include "zyn/error.hpp"
#include "zyn/http_transport.hpp"
#include "zyn/mock.hpp"

namespace zyn {

using json = nlohmann::json;

namespace {

class MockGenerator final : public TextGenerator {
public:
    std::string generate(const std::string& prompt, std::uint64_t seed) const override {
        return mock_generate(prompt, seed);
    }
};

class HttpGenerator final : public TextGenerator {
public:
    explicit HttpGenerator(GenerationBackendConfig cfg)
        : cfg_(std::move(cfg)), endpoint_(http::parse_base_url(cfg_.base_url)) {}

    std::string generate(const std::string& prompt, std::uint64_t seed) const override {
        const json request = {
            {"model", cfg_.model_id},   {"prompt", prompt}, {"max_tokens", cfg_.max_tokens},
            {"temperature", cfg_.temperature}, {"seed", seed},
        };
        const http::RetryPolicy policy{cfg_.max_retries, cfg_.timeout, cfg_.backoff_base};
        const std::string body =
            http::post_json(endpoint_, "/v1/completions", request.dump(), cfg_.api_key, policy);
        try {
            return json::parse(body).at("choices").at(0).at("text").get<std::string>();
        } catch (const json::exception& e) {
            throw Error(ErrorCode::BackendProtocolError,
                        std::string("generation response has no choices[0].text: ") + e.what());
        }
    }

private:
    GenerationBackendConfig cfg_;
    http::Endpoint endpoint_;
};

}  // namespace

void validate(const GenerationBackendConfig& cfg) {
    if (cfg.mock) return;
    if (cfg.base_url.empty())
        throw Error(ErrorCode::InvalidConfig, "generation base_url is required unless the mock is used");
    http::parse_base_url(cfg.base_url);
    if (cfg.max_tokens < 1) throw Error(ErrorCode::InvalidConfig, "generation max_tokens must be >= 1");
    if (cfg.timeout.count() <= 0) throw Error(ErrorCode::InvalidConfig, "generation timeout must be > 0");
    if (cfg.max_retries < 0) throw Error(ErrorCode::InvalidConfig, "generation max_retries must be >= 0");
}

std::unique_ptr<TextGenerator> make_generator(const GenerationBackendConfig& cfg) {
    validate(cfg);
    if (cfg.mock) return std::make_unique<MockGenerator>();
    return std::make_unique<HttpGenerator>(cfg);
}

}  // namespace zyn
