#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "zyn/backend.hpp"
#include "zyn/generation.hpp"
#include "zyn/reward.hpp"
#include "zyn/selector.hpp"

namespace zyn::qd {

// Quality-diversity search over generated texts. The archive is a grid of
// niches keyed by (category, sentiment bin); each niche keeps the fittest
// text ever offered to it.

struct QdConfig {
    std::vector<std::string> categories;
    std::vector<std::string> sentiment_words{"very negative", "negative", "neutral", "positive",
                                             "very positive"};
    int sentiment_bins = 10;
    EnsembleSpec fitness_questions;
    RewardSpec fitness_spec;
    EnsembleSpec sentiment_questions;
    RewardSpec sentiment_spec;
    std::vector<Question> category_questions;  // one per category
    int total_generations = 500;
    std::string prompt_template = "### Human: Generate a {sentiment} movie review, with focus on {category}.";
};

void validate(const QdConfig& cfg);

/// Appendix-style movie-review setup: five categories, five quality
/// questions, and either the single "Is the previous review positive?"
/// question scored by its raw Yes logit (only_yes) or the eight-question
/// contrastive sentiment ensemble.
QdConfig movie_review_config(bool only_yes);

struct CellKey {
    int category = 0;
    int bin = 0;

    friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct QdMetrics {
    int cells_filled = 0;
    double qd_score = 0.0;
    double avg_qd_score = 0.0;
};

class QdArchive {
public:
    QdArchive(int categories, int sentiment_bins);

    /// Stores the candidate iff the cell is empty or its aggregate beats the
    /// incumbent's. Always counts the offer. Throws KeyOutOfRange.
    bool offer(const ScoredCandidate& candidate, CellKey key);

    const ScoredCandidate* at(CellKey key) const;
    int categories() const noexcept { return categories_; }
    int sentiment_bins() const noexcept { return bins_; }
    std::size_t grid_size() const noexcept { return cells_.size(); }
    long insert_count() const noexcept { return insert_count_; }

    /// Running totals maintained by offer().
    QdMetrics incremental_metrics() const;

    /// Occupied cells in (category, bin) order.
    std::vector<std::pair<CellKey, const ScoredCandidate*>> occupied() const;

private:
    std::size_t slot(CellKey key) const;

    int categories_;
    int bins_;
    std::vector<std::optional<ScoredCandidate>> cells_;
    long insert_count_ = 0;
    int filled_ = 0;
    double qd_score_ = 0.0;
};

/// From-scratch metrics over the archive contents.
QdMetrics compute_metrics(const QdArchive& archive);

/// floor(score * bins) clamped to [0, bins - 1].
int sentiment_bin(double sentiment_score, int bins);

struct Descriptor {
    CellKey key;
    double sentiment_score = 0.0;
    std::vector<double> category_scores;
};

Descriptor describe(const std::string& text, const QdConfig& cfg, const LogitClient& client);

struct IterationRecord {
    int iter = 0;
    std::string prompt;
    std::string text;
    double fitness = 0.0;
    std::vector<double> per_question;
    int category = 0;
    double sentiment_score = 0.0;
    int bin = 0;
    bool accepted = false;
    std::optional<std::string> error;
};

/// Deterministic (sentiment word, category) schedule: combination
/// (seed + iter) mod |words|*|categories|, sentiment varying fastest.
std::string render_generation_prompt(const QdConfig& cfg, int iter, std::uint64_t seed);

struct RunResult {
    QdArchive archive;
    QdMetrics metrics;
    std::vector<IterationRecord> log;
    int failed_iterations = 0;
};

using IterationObserver = std::function<void(const IterationRecord&, const QdArchive&)>;

/// Generate-describe-offer loop. Per-iteration failures are logged and
/// skipped; throws only when every iteration fails or on cancellation.
RunResult run_search(const QdConfig& cfg, const TextGenerator& generator, const LogitClient& scorer,
                     std::uint64_t seed, const IterationObserver& observer = {},
                     std::stop_token stop = {});

// Serialization of run artifacts.
std::string iteration_to_jsonl(const IterationRecord& rec);
std::string config_digest(const QdConfig& cfg);
std::string archive_to_json(const QdArchive& archive, const QdConfig& cfg);
std::string metrics_to_json(const QdMetrics& metrics);
/// "Cells fill. | QD-score | Avg. QD-score" table, average at two decimals.
std::string format_metrics_table(const QdMetrics& metrics);

}  // namespace zyn::qd
