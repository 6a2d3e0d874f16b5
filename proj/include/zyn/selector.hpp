#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zyn/backend.hpp"
#include "zyn/reward.hpp"

namespace zyn {

struct ScoredCandidate {
    std::string text;
    std::vector<double> per_question;
    double aggregate = 0.0;
    std::size_t index = 0;
    std::optional<std::string> failure;  // set when any question failed

    bool failed() const noexcept { return failure.has_value(); }
};

struct BoNConfig {
    std::size_t n = 5;  // upper bound on candidates per round
    RewardSpec spec;
    EnsembleSpec ensemble;
};

void validate(const BoNConfig& cfg);

/// Scores every text against every ensemble question. Order-preserving; a
/// candidate with any failed question is marked failed.
std::vector<ScoredCandidate> score_candidates(std::span<const std::string> texts, const BoNConfig& cfg,
                                              const LogitClient& client);

/// Maximal aggregate among non-failed candidates, lowest index on ties.
/// Throws AllCandidatesFailed when nothing is selectable.
const ScoredCandidate& select_best(std::span<const ScoredCandidate> candidates);

}  // namespace zyn
