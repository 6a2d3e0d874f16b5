#include "zyn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zyn/error.hpp"

namespace zyn::metrics {

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        // Positions i..j (0-based) share rank mean(i+1 .. j+1).
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double spearman_rho(const PairedScores& p) {
    if (p.rewards.size() != p.ratings.size())
        throw Error(ErrorCode::LengthMismatch, "rewards and ratings differ in length");
    if (p.rewards.size() < 2) throw Error(ErrorCode::EmptyInput, "need at least two pairs");
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(p.rewards.begin(), p.rewards.end(), finite) ||
        !std::all_of(p.ratings.begin(), p.ratings.end(), finite))
        throw Error(ErrorCode::InvalidArgument, "scores must be finite");

    const auto rx = average_ranks(p.rewards);
    const auto ry = average_ranks(p.ratings);
    const double n = static_cast<double>(rx.size());
    const double mean = (n + 1.0) / 2.0;  // ranks always average to (n+1)/2
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw Error(ErrorCode::DegenerateInput, "correlation is undefined for a constant list");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Summary summarize(std::span<const double> scores) {
    if (scores.empty()) throw Error(ErrorCode::EmptyInput, "no scores to summarize");
    Summary s;
    s.count = scores.size();
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    s.min = *lo;
    s.max = *hi;
    s.mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(s.count);
    if (s.count > 1) {
        double ss = 0.0;
        for (double v : scores) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(s.count - 1));
    }
    return s;
}

}  // namespace zyn::metrics
