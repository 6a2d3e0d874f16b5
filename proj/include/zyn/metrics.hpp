#pragma once

#include <span>
#include <vector>

#include "zyn/error.hpp"

namespace zyn::metrics {

struct PairedScores {
    std::vector<double> rewards;
    std::vector<double> ratings;
};

/// 1-based ranks; tied values share the average of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman's rho: Pearson correlation of the average-rank vectors.
/// Throws LengthMismatch, EmptyInput (< 2 pairs), InvalidArgument (non-finite)
/// or DegenerateInput (either list constant).
double spearman_rho(const PairedScores& p);

struct Summary {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation, 0 for a single value
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

Summary summarize(std::span<const double> scores);

}  // namespace zyn::metrics
