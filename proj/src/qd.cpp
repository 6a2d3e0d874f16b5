#include "zyn/qd.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "zyn/json_io.hpp"
#include "zyn/mock.hpp"

namespace zyn::qd {

using ojson = nlohmann::ordered_json;

namespace {

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
    return s;
}

struct Evaluation {
    double fitness = 0.0;
    std::vector<double> per_question;
    Descriptor descriptor;
};

// Scores one text against fitness, category and sentiment questions in a
// single batch. Throws the first per-item error.
Evaluation evaluate(const std::string& text, const QdConfig& cfg, const LogitClient& client,
                    bool with_fitness) {
    std::vector<ScoringItem> items;
    const auto& fq = cfg.fitness_questions.questions;
    const auto& cq = cfg.category_questions;
    const auto& sq = cfg.sentiment_questions.questions;
    if (with_fitness) {
        for (const auto& q : fq) items.push_back({text, q});
    }
    for (const auto& q : cq) items.push_back({text, q});
    for (const auto& q : sq) items.push_back({text, q});

    const auto results = client.fetch_logits_batch(items);
    std::vector<LogitPair> pairs;
    pairs.reserve(results.size());
    for (const auto& r : results) pairs.push_back(r.value());

    Evaluation ev;
    std::size_t at = 0;
    if (with_fitness) {
        auto breakdown = ensemble_breakdown(std::span(pairs).subspan(at, fq.size()), cfg.fitness_spec,
                                            cfg.fitness_questions);
        ev.fitness = breakdown.aggregate;
        ev.per_question = std::move(breakdown.per_question);
        at += fq.size();
    }

    const RewardSpec bt{RewardVariant::BtProb};
    int best = 0;
    for (std::size_t i = 0; i < cq.size(); ++i) {
        const double s = single_reward(pairs[at + i], cq[i], bt);
        ev.descriptor.category_scores.push_back(s);
        if (s > ev.descriptor.category_scores[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    at += cq.size();

    const double sentiment = ensemble_reward(std::span(pairs).subspan(at, sq.size()), cfg.sentiment_spec,
                                             cfg.sentiment_questions);
    ev.descriptor.sentiment_score = to_unit_interval(sentiment, cfg.sentiment_spec);
    ev.descriptor.key = {best, sentiment_bin(ev.descriptor.sentiment_score, cfg.sentiment_bins)};
    return ev;
}

}  // namespace

void validate(const QdConfig& cfg) {
    if (cfg.categories.empty()) throw Error(ErrorCode::InvalidConfig, "categories must be non-empty");
    if (cfg.sentiment_words.empty())
        throw Error(ErrorCode::InvalidConfig, "sentiment_words must be non-empty");
    if (cfg.sentiment_bins < 1) throw Error(ErrorCode::InvalidConfig, "sentiment_bins must be >= 1");
    if (cfg.total_generations < 1)
        throw Error(ErrorCode::InvalidConfig, "total_generations must be >= 1");
    if (cfg.category_questions.size() != cfg.categories.size())
        throw Error(ErrorCode::InvalidConfig, "need exactly one category question per category");
    for (const auto& q : cfg.category_questions) validate(q);
    validate(cfg.fitness_questions);
    validate(cfg.fitness_spec);
    validate(cfg.sentiment_questions);
    validate(cfg.sentiment_spec);
}

QdConfig movie_review_config(bool only_yes) {
    QdConfig cfg;
    cfg.categories = {"photography", "soundtrack", "characters", "plot", "every aspect"};
    cfg.category_questions = {
        {"Does the previous movie review focus on photography?"},
        {"Does the previous movie review focus on soundtrack?"},
        {"Does the previous movie review focus on characters?"},
        {"Does the previous movie review focus on the plot?"},
        {"Does the previous movie review focus on every aspect?"},
    };
    cfg.fitness_questions = {{
        {"Does the text provide an assessment or evaluation of a film's plot, acting, cinematography, or other elements?"},
        {"Does the text mention the names of actors, directors, or other film industry professionals?"},
        {"Does the text make any reference to scenes, dialogues or specific moments from a movie?"},
        {"Does the text end with a recommendation on whether to watch the movie or not?"},
        {"Does the text contain language that suggests a personalized opinion or subjective viewpoint typically seen in a movie?"},
    }, true};
    cfg.fitness_spec = {RewardVariant::BtProb};
    if (only_yes) {
        cfg.sentiment_questions = {{{"Is the previous review positive?"}}, true};
        cfg.sentiment_spec = {RewardVariant::RawYesLogit};
    } else {
        cfg.sentiment_questions = {{
            {"Did the reviewer enjoy the overall plot and storyline?"},
            {"Is the reviewer's opinion about the characters and their development favorable?"},
            {"Is the reviewer's opinion on the pacing and editing of the movie positive?"},
            {"Does the review praise the movie's visuals and cinematography?"},
            {"Did the reviewer appreciate the soundtrack and overall audio aspect of the movie?"},
            {"Were the performances of the actors highlighted as a strong point in the review?"},
            {"Does the review mention any emotional impact or connection to the movie?"},
            {"Would the reviewer recommend this movie to others based on their opinion expressed in the review?"},
        }, true};
        cfg.sentiment_spec = {RewardVariant::BtProb};
    }
    return cfg;
}

QdArchive::QdArchive(int categories, int sentiment_bins) : categories_(categories), bins_(sentiment_bins) {
    if (categories < 1 || sentiment_bins < 1)
        throw Error(ErrorCode::InvalidConfig, "archive dimensions must be >= 1");
    cells_.resize(static_cast<std::size_t>(categories) * static_cast<std::size_t>(sentiment_bins));
}

std::size_t QdArchive::slot(CellKey key) const {
    if (key.category < 0 || key.category >= categories_ || key.bin < 0 || key.bin >= bins_) {
        throw Error(ErrorCode::KeyOutOfRange, "cell (" + std::to_string(key.category) + ", " +
                                                  std::to_string(key.bin) + ") is outside the " +
                                                  std::to_string(categories_) + "x" + std::to_string(bins_) +
                                                  " grid");
    }
    return static_cast<std::size_t>(key.category) * static_cast<std::size_t>(bins_) +
           static_cast<std::size_t>(key.bin);
}

bool QdArchive::offer(const ScoredCandidate& candidate, CellKey key) {
    auto& cell = cells_[slot(key)];
    ++insert_count_;
    if (cell && !(candidate.aggregate > cell->aggregate)) return false;
    if (cell) {
        qd_score_ += candidate.aggregate - cell->aggregate;
    } else {
        qd_score_ += candidate.aggregate;
        ++filled_;
    }
    cell = candidate;
    return true;
}

const ScoredCandidate* QdArchive::at(CellKey key) const {
    const auto& cell = cells_[slot(key)];
    return cell ? &*cell : nullptr;
}

QdMetrics QdArchive::incremental_metrics() const {
    return {filled_, qd_score_, filled_ > 0 ? qd_score_ / filled_ : 0.0};
}

std::vector<std::pair<CellKey, const ScoredCandidate*>> QdArchive::occupied() const {
    std::vector<std::pair<CellKey, const ScoredCandidate*>> out;
    for (int c = 0; c < categories_; ++c) {
        for (int b = 0; b < bins_; ++b) {
            if (const auto* cand = at({c, b})) out.emplace_back(CellKey{c, b}, cand);
        }
    }
    return out;
}

QdMetrics compute_metrics(const QdArchive& archive) {
    QdMetrics m;
    for (const auto& [key, cand] : archive.occupied()) {
        ++m.cells_filled;
        m.qd_score += cand->aggregate;
    }
    m.avg_qd_score = m.cells_filled > 0 ? m.qd_score / m.cells_filled : 0.0;
    return m;
}

int sentiment_bin(double sentiment_score, int bins) {
    if (bins < 1) throw Error(ErrorCode::InvalidConfig, "sentiment_bins must be >= 1");
    if (!(sentiment_score > 0.0)) return 0;  // also maps NaN to the lowest bin
    const double raw = std::floor(sentiment_score * bins);
    if (raw >= bins - 1) return bins - 1;
    return static_cast<int>(raw);
}

Descriptor describe(const std::string& text, const QdConfig& cfg, const LogitClient& client) {
    validate(cfg);
    return evaluate(text, cfg, client, false).descriptor;
}

std::string render_generation_prompt(const QdConfig& cfg, int iter, std::uint64_t seed) {
    const std::uint64_t n_words = cfg.sentiment_words.size();
    const std::uint64_t n_cats = cfg.categories.size();
    const std::uint64_t combos = n_words * n_cats;
    const std::uint64_t combo = (seed % combos + static_cast<std::uint64_t>(iter)) % combos;
    std::string prompt = replace_all(cfg.prompt_template, "{sentiment}", cfg.sentiment_words[combo % n_words]);
    return replace_all(std::move(prompt), "{category}", cfg.categories[(combo / n_words) % n_cats]);
}

RunResult run_search(const QdConfig& cfg, const TextGenerator& generator, const LogitClient& scorer,
                     std::uint64_t seed, const IterationObserver& observer, std::stop_token stop) {
    validate(cfg);
    RunResult result{QdArchive(static_cast<int>(cfg.categories.size()), cfg.sentiment_bins), {}, {}, 0};
    result.log.reserve(static_cast<std::size_t>(cfg.total_generations));

    for (int iter = 0; iter < cfg.total_generations; ++iter) {
        if (stop.stop_requested()) throw Error(ErrorCode::Cancelled, "QD run cancelled");
        IterationRecord rec;
        rec.iter = iter;
        rec.prompt = render_generation_prompt(cfg, iter, seed);
        try {
            rec.text = generator.generate(rec.prompt, seed + static_cast<std::uint64_t>(iter));
            const Evaluation ev = evaluate(rec.text, cfg, scorer, true);
            rec.fitness = ev.fitness;
            rec.per_question = ev.per_question;
            rec.category = ev.descriptor.key.category;
            rec.sentiment_score = ev.descriptor.sentiment_score;
            rec.bin = ev.descriptor.key.bin;
            ScoredCandidate cand{rec.text, rec.per_question, rec.fitness, static_cast<std::size_t>(iter), {}};
            rec.accepted = result.archive.offer(cand, ev.descriptor.key);
        } catch (const Error& e) {
            rec.error = e.what();
            ++result.failed_iterations;
        }
        if (observer) observer(rec, result.archive);
        result.log.push_back(std::move(rec));
    }
    if (result.failed_iterations == cfg.total_generations)
        throw Error(ErrorCode::AllCandidatesFailed, "every QD iteration failed; first error: " +
                                                        result.log.front().error.value_or(""));
    result.metrics = compute_metrics(result.archive);
    return result;
}

std::string iteration_to_jsonl(const IterationRecord& rec) {
    ojson j;
    j["iter"] = rec.iter;
    j["prompt"] = rec.prompt;
    j["text"] = rec.text;
    if (rec.error) {
        j["fitness"] = nullptr;
        j["per_question"] = nullptr;
        j["category"] = nullptr;
        j["sentiment_score"] = nullptr;
        j["bin"] = nullptr;
        j["accepted"] = false;
        j["error"] = *rec.error;
    } else {
        j["fitness"] = rec.fitness;
        j["per_question"] = rec.per_question;
        j["category"] = rec.category;
        j["sentiment_score"] = rec.sentiment_score;
        j["bin"] = rec.bin;
        j["accepted"] = rec.accepted;
    }
    return j.dump();
}

std::string config_digest(const QdConfig& cfg) {
    const nlohmann::json j = cfg;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
    return buf;
}

namespace {
ojson metrics_json(const QdMetrics& m) {
    ojson j;
    j["cells_filled"] = m.cells_filled;
    j["qd_score"] = m.qd_score;
    j["avg_qd_score"] = m.avg_qd_score;
    return j;
}
}  // namespace

std::string archive_to_json(const QdArchive& archive, const QdConfig& cfg) {
    ojson j;
    j["config_digest"] = config_digest(cfg);
    j["grid"] = {{"categories", archive.categories()}, {"sentiment_bins", archive.sentiment_bins()}};
    ojson cells = ojson::array();
    for (const auto& [key, cand] : archive.occupied()) {
        ojson cell;
        cell["category"] = cfg.categories.at(static_cast<std::size_t>(key.category));
        cell["category_index"] = key.category;
        cell["bin"] = key.bin;
        cell["fitness"] = cand->aggregate;
        cell["text"] = cand->text;
        cells.push_back(std::move(cell));
    }
    j["cells"] = std::move(cells);
    j["metrics"] = metrics_json(compute_metrics(archive));
    return j.dump(2);
}

std::string metrics_to_json(const QdMetrics& metrics) { return metrics_json(metrics).dump(2); }

std::string format_metrics_table(const QdMetrics& m) {
    char row[128];
    std::snprintf(row, sizeof row, "%-12d %-10.2f %.2f\n", m.cells_filled, m.qd_score, m.avg_qd_score);
    return std::string("Cells fill.  QD-score   Avg. QD-score\n") + row;
}

}  // namespace zyn::qd
