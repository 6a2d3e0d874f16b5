#include "zyn/reward.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "zyn/error.hpp"

namespace zyn {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Saturated probabilities stop one ulp short of 1 and the same distance above
// 0, so p(a,b) + p(b,a) stays exactly 1 and 0.5 - p never rounds to 0.5.
constexpr double kProbFloor = 0x1p-53;
constexpr double kProbCeil = 1.0 - 0x1p-53;

}  // namespace

std::string_view variant_name(RewardVariant v) noexcept {
    switch (v) {
        case RewardVariant::RawYesLogit: return "raw";
        case RewardVariant::BtProb: return "bt";
        case RewardVariant::LogOdds: return "log_odds";
        case RewardVariant::ScaledCentered: return "scaled";
    }
    return "bt";
}

RewardVariant parse_variant(std::string_view name) {
    const std::string n = lower(name);
    if (n == "raw" || n == "rawyeslogit") return RewardVariant::RawYesLogit;
    if (n == "bt" || n == "btprob") return RewardVariant::BtProb;
    if (n == "log_odds" || n == "logodds") return RewardVariant::LogOdds;
    if (n == "scaled" || n == "scaledcentered") return RewardVariant::ScaledCentered;
    throw Error(ErrorCode::InvalidSpec, "unknown reward variant '" + std::string(name) + "'");
}

std::string_view polarity_name(Polarity p) noexcept {
    return p == Polarity::Negated ? "negated" : "affirmative";
}

Polarity parse_polarity(std::string_view name) {
    const std::string n = lower(name);
    if (n == "affirmative") return Polarity::Affirmative;
    if (n == "negated") return Polarity::Negated;
    throw Error(ErrorCode::InvalidSpec, "unknown polarity '" + std::string(name) + "'");
}

void validate(const Question& q) {
    if (q.text.empty()) throw Error(ErrorCode::InvalidSpec, "question text is empty");
    if (!std::isfinite(q.weight) || q.weight < 0.0)
        throw Error(ErrorCode::InvalidSpec, "question weight must be finite and >= 0");
}

void validate(const RewardSpec& spec) {
    if (spec.variant == RewardVariant::ScaledCentered) {
        if (spec.k_s == 0.0) throw Error(ErrorCode::InvalidSpec, "k_s must be non-zero");
        if (!std::isfinite(spec.k_s) || !std::isfinite(spec.k_c))
            throw Error(ErrorCode::InvalidSpec, "k_s and k_c must be finite");
    }
}

void validate(const EnsembleSpec& ensemble) {
    if (ensemble.questions.empty())
        throw Error(ErrorCode::InvalidSpec, "ensemble needs at least one question");
    bool any_positive = false;
    for (const auto& q : ensemble.questions) {
        validate(q);
        any_positive = any_positive || q.weight > 0.0;
    }
    if (!any_positive) throw Error(ErrorCode::InvalidSpec, "all ensemble weights are zero");
}

std::vector<double> effective_weights(const EnsembleSpec& ensemble) {
    std::vector<double> w;
    w.reserve(ensemble.questions.size());
    for (const auto& q : ensemble.questions) w.push_back(q.weight);
    if (ensemble.normalize_weights) {
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        if (!(total > 0.0)) throw Error(ErrorCode::InvalidSpec, "all ensemble weights are zero");
        for (auto& x : w) x /= total;
    }
    return w;
}

LogitPair effective_logits(LogitPair pair, Polarity polarity) noexcept {
    if (polarity == Polarity::Negated) return {pair.v_no, pair.v_yes};
    return pair;
}

double bt_prob(LogitPair pair) noexcept {
    const double m = std::max(pair.v_yes, pair.v_no);
    const double e_yes = std::exp(pair.v_yes - m);
    const double e_no = std::exp(pair.v_no - m);
    return std::clamp(e_yes / (e_yes + e_no), kProbFloor, kProbCeil);
}

double log_odds(LogitPair pair) noexcept { return pair.v_yes - pair.v_no; }

double scaled_centered(LogitPair pair, double k_s, double k_c) {
    if (k_s == 0.0) throw Error(ErrorCode::InvalidSpec, "k_s must be non-zero");
    return k_s * (bt_prob(pair) - k_c);
}

double single_reward(LogitPair pair, const Question& q, const RewardSpec& spec) {
    const LogitPair eff = effective_logits(pair, q.polarity);
    switch (spec.variant) {
        case RewardVariant::RawYesLogit: return eff.v_yes;
        case RewardVariant::BtProb: return bt_prob(eff);
        case RewardVariant::LogOdds: return log_odds(eff);
        case RewardVariant::ScaledCentered: return scaled_centered(eff, spec.k_s, spec.k_c);
    }
    throw Error(ErrorCode::InvalidSpec, "unhandled reward variant");
}

EnsembleBreakdown ensemble_breakdown(std::span<const LogitPair> pairs, const RewardSpec& spec,
                                     const EnsembleSpec& ensemble) {
    if (pairs.size() != ensemble.questions.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    "got " + std::to_string(pairs.size()) + " logit pairs for " +
                        std::to_string(ensemble.questions.size()) + " questions");
    }
    const auto weights = effective_weights(ensemble);
    EnsembleBreakdown out;
    out.per_question.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double r = single_reward(pairs[i], ensemble.questions[i], spec);
        out.per_question.push_back(r);
        // A zero weight contributes nothing, even when r is large.
        if (weights[i] != 0.0) out.aggregate += weights[i] * r;
    }
    return out;
}

double ensemble_reward(std::span<const LogitPair> pairs, const RewardSpec& spec,
                       const EnsembleSpec& ensemble) {
    return ensemble_breakdown(pairs, spec, ensemble).aggregate;
}

double to_unit_interval(double reward, const RewardSpec& spec) noexcept {
    switch (spec.variant) {
        case RewardVariant::BtProb: return std::clamp(reward, 0.0, 1.0);
        case RewardVariant::ScaledCentered:
            return std::clamp(reward / spec.k_s + spec.k_c, 0.0, 1.0);
        case RewardVariant::RawYesLogit:
        case RewardVariant::LogOdds: return bt_prob({reward, 0.0});
    }
    return 0.0;
}

}  // namespace zyn
