#include "zyn/selector.hpp"

#include <cmath>

namespace zyn {

void validate(const BoNConfig& cfg) {
    if (cfg.n < 1) throw Error(ErrorCode::InvalidConfig, "best-of-N needs n >= 1");
    validate(cfg.spec);
    validate(cfg.ensemble);
}

std::vector<ScoredCandidate> score_candidates(std::span<const std::string> texts, const BoNConfig& cfg,
                                              const LogitClient& client) {
    validate(cfg);
    if (texts.empty()) throw Error(ErrorCode::EmptyInput, "no candidate texts");
    if (texts.size() > cfg.n) {
        throw Error(ErrorCode::InvalidArgument, std::to_string(texts.size()) +
                                                    " candidates exceed n = " + std::to_string(cfg.n));
    }

    const auto& questions = cfg.ensemble.questions;
    const std::size_t k = questions.size();
    std::vector<ScoringItem> items;
    items.reserve(texts.size() * k);
    for (const auto& t : texts) {
        for (const auto& q : questions) items.push_back({t, q});
    }
    const auto results = client.fetch_logits_batch(items);

    std::vector<ScoredCandidate> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        ScoredCandidate c;
        c.text = texts[i];
        c.index = i;
        std::vector<LogitPair> pairs;
        pairs.reserve(k);
        for (std::size_t j = 0; j < k; ++j) {
            const auto& r = results[i * k + j];
            if (!r) {
                c.failure = "question " + std::to_string(j) + ": " + r.error().what();
                break;
            }
            pairs.push_back(r.value());
        }
        if (!c.failed()) {
            auto breakdown = ensemble_breakdown(pairs, cfg.spec, cfg.ensemble);
            if (!std::isfinite(breakdown.aggregate)) {
                c.failure = "aggregate reward is not finite";
            } else {
                c.per_question = std::move(breakdown.per_question);
                c.aggregate = breakdown.aggregate;
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

const ScoredCandidate& select_best(std::span<const ScoredCandidate> candidates) {
    const ScoredCandidate* best = nullptr;
    for (const auto& c : candidates) {
        if (c.failed()) continue;
        if (!best || c.aggregate > best->aggregate ||
            (c.aggregate == best->aggregate && c.index < best->index)) {
            best = &c;
        }
    }
    if (!best) throw Error(ErrorCode::AllCandidatesFailed, "no candidate could be scored");
    return *best;
}

}  // namespace zyn
