#pragma once

#include <json.hpp>

#include "zyn/backend.hpp"
#include "zyn/generation.hpp"
#include "zyn/qd.hpp"
#include "zyn/reward.hpp"

// JSON mappings for the configuration and wire types. Every field except
// question text is optional on input and falls back to the struct default.

namespace zyn {

void to_json(nlohmann::json& j, const Question& q);
void from_json(const nlohmann::json& j, Question& q);

void to_json(nlohmann::json& j, const RewardSpec& s);
void from_json(const nlohmann::json& j, RewardSpec& s);

void to_json(nlohmann::json& j, const EnsembleSpec& e);
void from_json(const nlohmann::json& j, EnsembleSpec& e);

void to_json(nlohmann::json& j, const BackendConfig& c);
void from_json(const nlohmann::json& j, BackendConfig& c);

void to_json(nlohmann::json& j, const GenerationBackendConfig& c);
void from_json(const nlohmann::json& j, GenerationBackendConfig& c);

/// Questions file: JSON array of {text, polarity, weight}. Throws InvalidSpec.
std::vector<Question> parse_questions(const nlohmann::json& j);

}  // namespace zyn

namespace zyn::qd {

void to_json(nlohmann::json& j, const QdConfig& c);
/// A "preset" of "only_yes" or "ensemble" starts from movie_review_config;
/// other fields override it. Missing category_questions are derived as
/// "Does the previous movie review focus on {category}?".
void from_json(const nlohmann::json& j, QdConfig& c);

}  // namespace zyn::qd
