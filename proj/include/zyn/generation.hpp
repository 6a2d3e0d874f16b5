#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

namespace zyn {

/// Backend producing candidate texts (the student / generator model).
struct GenerationBackendConfig {
    bool mock = false;
    std::string base_url;
    std::optional<std::string> api_key;
    std::string model_id = "default";
    int max_tokens = 256;
    double temperature = 0.7;
    std::chrono::milliseconds timeout{60'000};
    int max_retries = 2;
    std::chrono::milliseconds backoff_base{100};
};

void validate(const GenerationBackendConfig& cfg);

class TextGenerator {
public:
    virtual ~TextGenerator() = default;
    virtual std::string generate(const std::string& prompt, std::uint64_t seed) const = 0;
};

/// POST {base_url}/v1/completions with { model, prompt, max_tokens,
/// temperature, seed }; the text is choices[0].text.
std::unique_ptr<TextGenerator> make_generator(const GenerationBackendConfig& cfg);

}  // namespace zyn
