#include "zyn/json_io.hpp"

#include "zyn/error.hpp"

namespace zyn {

using json = nlohmann::json;

void to_json(json& j, const Question& q) {
    j = json{{"text", q.text}, {"polarity", polarity_name(q.polarity)}, {"weight", q.weight}};
}

void from_json(const json& j, Question& q) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidSpec, "question must be an object");
    if (!j.contains("text") || !j.at("text").is_string())
        throw Error(ErrorCode::InvalidSpec, "question needs a string 'text'");
    q.text = j.at("text").get<std::string>();
    q.polarity = j.contains("polarity") ? parse_polarity(j.at("polarity").get<std::string>())
                                        : Polarity::Affirmative;
    q.weight = j.value("weight", 1.0);
    validate(q);
}

void to_json(json& j, const RewardSpec& s) {
    j = json{{"variant", variant_name(s.variant)}, {"k_s", s.k_s}, {"k_c", s.k_c}};
}

void from_json(const json& j, RewardSpec& s) {
    RewardSpec d;
    s.variant = j.contains("variant") ? parse_variant(j.at("variant").get<std::string>()) : d.variant;
    s.k_s = j.value("k_s", d.k_s);
    s.k_c = j.value("k_c", d.k_c);
    validate(s);
}

void to_json(json& j, const EnsembleSpec& e) {
    j = json{{"questions", e.questions}, {"normalize_weights", e.normalize_weights}};
}

void from_json(const json& j, EnsembleSpec& e) {
    e.questions = parse_questions(j.at("questions"));
    e.normalize_weights = j.value("normalize_weights", false);
    validate(e);
}

void to_json(json& j, const BackendConfig& c) {
    j = json{
        {"mock", c.mock},
        {"base_url", c.base_url},
        {"model_id", c.model_id},
        {"timeout_ms", c.timeout.count()},
        {"max_retries", c.max_retries},
        {"backoff_ms", c.backoff_base.count()},
        {"max_in_flight", c.max_in_flight},
        {"top_k", c.top_k},
        {"scores_are_logprobs", c.scores_are_logprobs},
        {"yes_surface_forms", c.yes_surface_forms},
        {"no_surface_forms", c.no_surface_forms},
    };
    // The key is a secret; it is never serialized back out.
}

void from_json(const json& j, BackendConfig& c) {
    const BackendConfig d;
    c.mock = j.value("mock", d.mock);
    c.base_url = j.value("base_url", d.base_url);
    if (j.contains("api_key") && j.at("api_key").is_string()) c.api_key = j.at("api_key").get<std::string>();
    c.model_id = j.value("model_id", d.model_id);
    c.timeout = std::chrono::milliseconds(j.value("timeout_ms", d.timeout.count()));
    c.max_retries = j.value("max_retries", d.max_retries);
    c.backoff_base = std::chrono::milliseconds(j.value("backoff_ms", d.backoff_base.count()));
    c.max_in_flight = j.value("max_in_flight", d.max_in_flight);
    c.top_k = j.value("top_k", d.top_k);
    c.scores_are_logprobs = j.value("scores_are_logprobs", d.scores_are_logprobs);
    c.yes_surface_forms = j.value("yes_surface_forms", d.yes_surface_forms);
    c.no_surface_forms = j.value("no_surface_forms", d.no_surface_forms);
}

void to_json(json& j, const GenerationBackendConfig& c) {
    j = json{
        {"mock", c.mock},         {"base_url", c.base_url},
        {"model_id", c.model_id}, {"max_tokens", c.max_tokens},
        {"temperature", c.temperature}, {"timeout_ms", c.timeout.count()},
        {"max_retries", c.max_retries}, {"backoff_ms", c.backoff_base.count()},
    };
}

void from_json(const json& j, GenerationBackendConfig& c) {
    const GenerationBackendConfig d;
    c.mock = j.value("mock", d.mock);
    c.base_url = j.value("base_url", d.base_url);
    if (j.contains("api_key") && j.at("api_key").is_string()) c.api_key = j.at("api_key").get<std::string>();
    c.model_id = j.value("model_id", d.model_id);
    c.max_tokens = j.value("max_tokens", d.max_tokens);
    c.temperature = j.value("temperature", d.temperature);
    c.timeout = std::chrono::milliseconds(j.value("timeout_ms", d.timeout.count()));
    c.max_retries = j.value("max_retries", d.max_retries);
    c.backoff_base = std::chrono::milliseconds(j.value("backoff_ms", d.backoff_base.count()));
}

std::vector<Question> parse_questions(const json& j) {
    if (!j.is_array()) throw Error(ErrorCode::InvalidSpec, "questions must be a JSON array");
    std::vector<Question> out;
    out.reserve(j.size());
    for (const auto& item : j) out.push_back(item.get<Question>());
    return out;
}

}  // namespace zyn

namespace zyn::qd {

using json = nlohmann::json;

void to_json(json& j, const QdConfig& c) {
    j = json{
        {"categories", c.categories},
        {"sentiment_words", c.sentiment_words},
        {"sentiment_bins", c.sentiment_bins},
        {"fitness_questions", c.fitness_questions},
        {"fitness_spec", c.fitness_spec},
        {"sentiment_questions", c.sentiment_questions},
        {"sentiment_spec", c.sentiment_spec},
        {"category_questions", c.category_questions},
        {"total_generations", c.total_generations},
        {"prompt_template", c.prompt_template},
    };
}

void from_json(const json& j, QdConfig& c) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "QD config must be a JSON object");
    if (j.contains("preset")) {
        const auto preset = j.at("preset").get<std::string>();
        if (preset == "only_yes") c = movie_review_config(true);
        else if (preset == "ensemble") c = movie_review_config(false);
        else throw Error(ErrorCode::InvalidConfig, "unknown QD preset '" + preset + "'");
    }
    const bool categories_given = j.contains("categories");
    if (categories_given) c.categories = j.at("categories").get<std::vector<std::string>>();
    if (j.contains("sentiment_words")) c.sentiment_words = j.at("sentiment_words").get<std::vector<std::string>>();
    c.sentiment_bins = j.value("sentiment_bins", c.sentiment_bins);
    if (j.contains("fitness_questions")) c.fitness_questions = j.at("fitness_questions").get<EnsembleSpec>();
    if (j.contains("fitness_spec")) c.fitness_spec = j.at("fitness_spec").get<RewardSpec>();
    if (j.contains("sentiment_questions")) c.sentiment_questions = j.at("sentiment_questions").get<EnsembleSpec>();
    if (j.contains("sentiment_spec")) c.sentiment_spec = j.at("sentiment_spec").get<RewardSpec>();
    if (j.contains("category_questions")) {
        c.category_questions = parse_questions(j.at("category_questions"));
    } else if (categories_given || c.category_questions.size() != c.categories.size()) {
        c.category_questions.clear();
        for (const auto& cat : c.categories)
            c.category_questions.push_back({"Does the previous movie review focus on " + cat + "?"});
    }
    c.total_generations = j.value("total_generations", c.total_generations);
    c.prompt_template = j.value("prompt_template", c.prompt_template);
    validate(c);
}

}  // namespace zyn::qd
