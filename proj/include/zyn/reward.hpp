#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zyn/error.hpp"

namespace zyn {

enum class Polarity {
    Affirmative,
    Negated,  // Yes/No logits are exchanged before scoring
};

/// A yes-no critic question. A high probability of "Yes" means high reward
/// unless the polarity is Negated.
struct Question {
    std::string text;
    Polarity polarity = Polarity::Affirmative;
    double weight = 1.0;
};

/// Unnormalized first-token scores of "Yes" and "No" for one (text, question).
struct LogitPair {
    double v_yes = 0.0;
    double v_no = 0.0;

    friend bool operator==(const LogitPair&, const LogitPair&) = default;
};

enum class RewardVariant {
    RawYesLogit,
    BtProb,
    LogOdds,
    ScaledCentered,
};

struct RewardSpec {
    RewardVariant variant = RewardVariant::BtProb;
    double k_s = 10.0;  // scale, ScaledCentered only
    double k_c = 0.5;   // center, ScaledCentered only
};

struct EnsembleSpec {
    std::vector<Question> questions;
    bool normalize_weights = false;

    std::size_t size() const noexcept { return questions.size(); }
};

/// Per-question rewards and their weighted aggregate.
struct EnsembleBreakdown {
    std::vector<double> per_question;
    double aggregate = 0.0;
};

// Short names used on the command line and in records: raw, bt, log_odds, scaled.
std::string_view variant_name(RewardVariant v) noexcept;
// Accepts both the short names and RawYesLogit/BtProb/LogOdds/ScaledCentered.
RewardVariant parse_variant(std::string_view name);
std::string_view polarity_name(Polarity p) noexcept;
Polarity parse_polarity(std::string_view name);

void validate(const Question& q);
void validate(const RewardSpec& spec);
void validate(const EnsembleSpec& ensemble);

/// Weights actually applied by ensemble aggregation.
std::vector<double> effective_weights(const EnsembleSpec& ensemble);

LogitPair effective_logits(LogitPair pair, Polarity polarity) noexcept;

/// Probability that "Yes" is preferred over "No" under a Bradley-Terry
/// contrast of the two logits. Evaluated after subtracting max(v_yes, v_no);
/// the result is clamped into the open interval (0, 1).
double bt_prob(LogitPair pair) noexcept;

/// log(p / (1 - p)) for p = bt_prob(pair), evaluated as v_yes - v_no.
double log_odds(LogitPair pair) noexcept;

/// k_s * (bt_prob(pair) - k_c). Throws InvalidSpec when k_s == 0.
double scaled_centered(LogitPair pair, double k_s, double k_c);

double single_reward(LogitPair pair, const Question& q, const RewardSpec& spec);

EnsembleBreakdown ensemble_breakdown(std::span<const LogitPair> pairs, const RewardSpec& spec,
                                     const EnsembleSpec& ensemble);

double ensemble_reward(std::span<const LogitPair> pairs, const RewardSpec& spec,
                       const EnsembleSpec& ensemble);

/// Maps a reward of the given variant back onto [0, 1]: BtProb as is,
/// ScaledCentered inverted to its probability, logit-scale variants through
/// the logistic function.
double to_unit_interval(double reward, const RewardSpec& spec) noexcept;

}  // namespace zyn
