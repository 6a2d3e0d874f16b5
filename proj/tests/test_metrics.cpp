#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "zyn/metrics.hpp"

using namespace zyn;
using namespace zyn::metrics;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Spearman, Examples) {
    EXPECT_EQ(spearman_rho({{1, 2, 3}, {10, 20, 30}}), 1.0);
    EXPECT_EQ(spearman_rho({{1, 2, 3}, {3, 2, 1}}), -1.0);
    EXPECT_NEAR(spearman_rho({{1, 2, 3, 4}, {2, 1, 4, 3}}), 0.6, 1e-15);
}

TEST(Spearman, TiesUseAverageRanks) {
    const std::vector<double> v{10, 20, 20, 30};
    EXPECT_EQ(average_ranks(v), (std::vector<double>{1.0, 2.5, 2.5, 4.0}));
    // scipy.stats.spearmanr([1,2,2,3],[1,3,2,4]) = 0.9486832980505139
    EXPECT_NEAR(spearman_rho({{1, 2, 2, 3}, {1, 3, 2, 4}}), 0.9486832980505139, 1e-12);
}

TEST(Spearman, Symmetry) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n;
    for (int t = 0; t < 100; ++t) {
        PairedScores p;
        for (int i = 0; i < 12; ++i) {
            p.rewards.push_back(n(rng));
            p.ratings.push_back(std::round(n(rng) * 2));
        }
        try {
            EXPECT_NEAR(spearman_rho(p), spearman_rho({p.ratings, p.rewards}), 1e-14);
        } catch (const Error&) {
        }
    }
}

TEST(Spearman, Errors) {
    EXPECT_EQ(code_of([] { spearman_rho({{1, 2, 3}, {5, 5, 5}}); }), ErrorCode::DegenerateInput);
    EXPECT_EQ(code_of([] { spearman_rho({{1, 2}, {1, 2, 3}}); }), ErrorCode::LengthMismatch);
    EXPECT_EQ(code_of([] { spearman_rho({{1}, {1}}); }), ErrorCode::EmptyInput);
    EXPECT_EQ(code_of([] { spearman_rho({{1, NAN}, {1, 2}}); }), ErrorCode::InvalidArgument);
}

TEST(Summarize, Examples) {
    const auto one = summarize(std::vector<double>{0.5});
    EXPECT_EQ(one.mean, 0.5);
    EXPECT_EQ(one.std, 0.0);
    EXPECT_EQ(one.min, 0.5);
    EXPECT_EQ(one.max, 0.5);
    EXPECT_EQ(one.count, 1u);
    const auto two = summarize(std::vector<double>{0.0, 1.0});
    EXPECT_EQ(two.mean, 0.5);
    EXPECT_NEAR(two.std, std::sqrt(0.5), 1e-15);
    EXPECT_EQ(summarize(std::vector<double>{3, 3, 3}).std, 0.0);
    EXPECT_EQ(code_of([] { summarize(std::vector<double>{}); }), ErrorCode::EmptyInput);
}
