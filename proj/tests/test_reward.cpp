#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "zyn/reward.hpp"

using namespace zyn;

namespace {

// Logistic values frozen from a 50-digit mpmath evaluation.
constexpr double kSigma2 = 0.8807970779778823;
constexpr double kSigmaMinus2 = 0.11920292202211755;
constexpr double kScaled2 = 3.807970779778823;

void expect_code(ErrorCode code, auto&& fn) {
    try {
        fn();
        ADD_FAILURE() << "expected " << to_string(code);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

}  // namespace

TEST(EffectiveLogits, AffirmativeIsIdentity) {
    EXPECT_EQ(effective_logits({2.0, -1.0}, Polarity::Affirmative), (LogitPair{2.0, -1.0}));
}

TEST(EffectiveLogits, NegatedSwaps) {
    EXPECT_EQ(effective_logits({2.0, -1.0}, Polarity::Negated), (LogitPair{-1.0, 2.0}));
    EXPECT_EQ(effective_logits({0.0, 0.0}, Polarity::Negated), (LogitPair{0.0, 0.0}));
}

TEST(BtProb, Examples) {
    EXPECT_EQ(bt_prob({0.0, 0.0}), 0.5);
    EXPECT_NEAR(bt_prob({2.0, 0.0}), kSigma2, 1e-16);
    const double hi = bt_prob({1000.0, -1000.0});
    EXPECT_TRUE(std::isfinite(hi));
    EXPECT_GT(hi, 1.0 - 1e-12);
    EXPECT_LT(hi, 1.0);
    const double lo = bt_prob({-1000.0, 1000.0});
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(lo, 1e-12);
}

TEST(BtProb, SwapAndShiftOnRandomPairs) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> logit(-40.0, 40.0), shift(-50.0, 50.0);
    for (int i = 0; i < 2000; ++i) {
        const double a = logit(rng), b = logit(rng), c = shift(rng);
        EXPECT_NEAR(bt_prob({a, b}) + bt_prob({b, a}), 1.0, 1e-12);
        EXPECT_NEAR(bt_prob({a + c, b + c}), bt_prob({a, b}), 1e-12);
    }
}

TEST(LogOdds, Examples) {
    EXPECT_EQ(log_odds({0.0, 0.0}), 0.0);
    EXPECT_EQ(log_odds({3.5, 1.5}), 2.0);
    EXPECT_NEAR(log_odds({-1.2, 0.8}), -2.0, 1e-15);
    const double p = bt_prob({-1.2, 0.8});
    EXPECT_NEAR(std::log(p / (1.0 - p)), -2.0, 1e-9);
}

TEST(ScaledCentered, Examples) {
    EXPECT_EQ(scaled_centered({0.0, 0.0}, 10.0, 0.5), 0.0);
    EXPECT_NEAR(scaled_centered({2.0, 0.0}, 10.0, 0.5), kScaled2, 1e-14);
    EXPECT_EQ(scaled_centered({0.3, -1.7}, 1.0, 0.0), bt_prob({0.3, -1.7}));
}

TEST(ScaledCentered, ZeroScaleIsInvalid) {
    expect_code(ErrorCode::InvalidSpec, [] { scaled_centered({0.0, 0.0}, 0.0, 0.5); });
    expect_code(ErrorCode::InvalidSpec, [] { validate(RewardSpec{RewardVariant::ScaledCentered, 0.0, 0.5}); });
    EXPECT_NO_THROW(validate(RewardSpec{RewardVariant::BtProb, 0.0, 0.5}));
}

TEST(SingleReward, DispatchesAfterPolarity) {
    const Question pos{"Is this movie review positive?"};
    const Question neg{"Is this movie review negative?", Polarity::Negated};
    EXPECT_NEAR(single_reward({2.0, 0.0}, pos, {}), kSigma2, 1e-16);
    EXPECT_NEAR(single_reward({2.0, 0.0}, neg, {}), kSigmaMinus2, 1e-16);
    EXPECT_EQ(single_reward({2.0, 0.0}, pos, {RewardVariant::RawYesLogit}), 2.0);
    EXPECT_EQ(single_reward({2.0, 0.0}, neg, {RewardVariant::RawYesLogit}), 0.0);
    EXPECT_EQ(single_reward({2.0, 0.5}, neg, {RewardVariant::LogOdds}), -1.5);
}

TEST(EnsembleReward, WeightedMean) {
    const EnsembleSpec ens{{{"A?"}, {"B?"}}, true};
    const std::vector<LogitPair> pairs{{std::log(4.0), 0.0}, {std::log(1.5), 0.0}};
    EXPECT_NEAR(ensemble_reward(pairs, {}, ens), 0.7, 1e-15);
    const auto br = ensemble_breakdown(pairs, {}, ens);
    ASSERT_EQ(br.per_question.size(), 2u);
    EXPECT_NEAR(br.per_question[0], 0.8, 1e-15);
    EXPECT_NEAR(br.per_question[1], 0.6, 1e-15);
}

TEST(EnsembleReward, RawWeightsAreNotNormalized) {
    const EnsembleSpec ens{{{"A?", Polarity::Affirmative, 2.0}, {"B?", Polarity::Affirmative, 1.0}}, false};
    const std::vector<LogitPair> pairs{{0.0, 0.0}, {0.0, 0.0}};
    EXPECT_EQ(ensemble_reward(pairs, {}, ens), 1.5);
}

TEST(EnsembleReward, SingleQuestionAndZeroWeight) {
    const Question q{"Is this movie review positive?"};
    const LogitPair p{1.25, -0.5};
    EXPECT_EQ(ensemble_reward(std::vector{p}, {}, EnsembleSpec{{q}, false}), single_reward(p, q, {}));

    const EnsembleSpec ens{{{"A?", Polarity::Affirmative, 0.0}, {"B?", Polarity::Affirmative, 1.0}}, true};
    const std::vector<LogitPair> pairs{{std::numeric_limits<double>::max(), 0.0}, {0.3, 0.1}};
    EXPECT_EQ(ensemble_reward(pairs, {}, ens), bt_prob({0.3, 0.1}));
}

TEST(EnsembleReward, Errors) {
    const EnsembleSpec two{{{"A?"}, {"B?"}}, false};
    expect_code(ErrorCode::LengthMismatch, [&] { ensemble_reward(std::vector<LogitPair>{{0, 0}}, {}, two); });
    const EnsembleSpec zero{{{"A?", Polarity::Affirmative, 0.0}}, true};
    expect_code(ErrorCode::InvalidSpec, [&] { ensemble_reward(std::vector<LogitPair>{{0, 0}}, {}, zero); });
    expect_code(ErrorCode::InvalidSpec, [] { validate(EnsembleSpec{{}, false}); });
    expect_code(ErrorCode::InvalidSpec, [] { validate(Question{"", Polarity::Affirmative, 1.0}); });
    expect_code(ErrorCode::InvalidSpec, [] { validate(Question{"Q?", Polarity::Affirmative, -0.1}); });
}

TEST(EnsembleReward, NormalizedStaysInHull) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> logit(-8.0, 8.0), w(0.0, 3.0);
    std::uniform_int_distribution<int> k(1, 8);
    for (int t = 0; t < 300; ++t) {
        EnsembleSpec ens{{}, true};
        std::vector<LogitPair> pairs;
        const int K = k(rng);
        for (int i = 0; i < K; ++i) {
            ens.questions.push_back({"Q" + std::to_string(i) + "?", Polarity::Affirmative, w(rng) + 1e-3});
            pairs.push_back({logit(rng), logit(rng)});
        }
        const auto br = ensemble_breakdown(pairs, {RewardVariant::LogOdds}, ens);
        const auto [lo, hi] = std::minmax_element(br.per_question.begin(), br.per_question.end());
        EXPECT_GE(br.aggregate, *lo - 1e-12);
        EXPECT_LE(br.aggregate, *hi + 1e-12);
    }
}

TEST(Names, RoundTrip) {
    for (auto v : {RewardVariant::RawYesLogit, RewardVariant::BtProb, RewardVariant::LogOdds,
                   RewardVariant::ScaledCentered})
        EXPECT_EQ(parse_variant(variant_name(v)), v);
    EXPECT_EQ(parse_variant("ScaledCentered"), RewardVariant::ScaledCentered);
    EXPECT_EQ(parse_variant("BtProb"), RewardVariant::BtProb);
    EXPECT_EQ(parse_polarity("negated"), Polarity::Negated);
    expect_code(ErrorCode::InvalidSpec, [] { parse_variant("softmax"); });
}

TEST(UnitInterval, MapsEachVariant) {
    EXPECT_NEAR(to_unit_interval(0.8, {RewardVariant::BtProb}), 0.8, 1e-15);
    EXPECT_NEAR(to_unit_interval(2.0, {RewardVariant::RawYesLogit}), kSigma2, 1e-16);
    EXPECT_NEAR(to_unit_interval(kScaled2, {RewardVariant::ScaledCentered, 10.0, 0.5}), kSigma2, 1e-15);
}
