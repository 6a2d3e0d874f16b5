#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "zyn/backend.hpp"
#include "zyn/reward.hpp"

namespace zyn {

// Deterministic stand-in for an instruction-tuned critic.
//
// Each keyword table is a UTF-8 file with one "word<TAB>weight" per line.
// Lines starting with '#' are comments, except "# trigger: <phrase>", which
// routes any question containing <phrase> (case-insensitive) to that table.
// Questions matching no trigger use the table named "sentiment".
//
// For text o and question q scored against table T:
//   v_yes = 2 * sum(T[w] for each word w of o) + 0.1 * clamp(hash(q), -1, 1)
//   v_no  = -v_yes
// With the shipped +1/-1 weights the sum is (positive hits - negative hits).

// Texts containing these markers make the mock misbehave on purpose.
inline constexpr std::string_view kMockNoYesNoMarker = "[[no-yes-no]]";
inline constexpr std::string_view kMockMalformedMarker = "[[malformed]]";

struct KeywordTable {
    std::string name;
    std::vector<std::string> triggers;                 // lower-cased
    std::vector<std::pair<std::string, double>> words;  // file order

    double weight_of(std::string_view word) const;
};

KeywordTable parse_keyword_table(std::string name, std::string_view tsv);

class MockLexicon {
public:
    explicit MockLexicon(std::vector<KeywordTable> tables);

    /// Tables compiled in from data/mock/*.tsv.
    static const MockLexicon& builtin();
    /// Every *.tsv file in dir, table name = file stem.
    static MockLexicon load(const std::filesystem::path& dir);

    const KeywordTable& table_for(std::string_view question) const;
    const KeywordTable* find(std::string_view name) const;
    /// First table whose trigger occurs in text, or nullptr.
    const KeywordTable* match_trigger(std::string_view text) const;
    const std::vector<KeywordTable>& tables() const noexcept { return tables_; }

private:
    std::vector<KeywordTable> tables_;
    std::size_t default_index_ = 0;
};

/// Lower-cased runs of [a-z0-9'].
std::vector<std::string> mock_words(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view s) noexcept;

/// Stable question hash mapped onto [-1, 1).
double question_hash_unit(std::string_view question) noexcept;

LogitPair mock_score(std::string_view o, const Question& q);
LogitPair mock_score(std::string_view o, const Question& q, const MockLexicon& lexicon);

/// In-process LogprobSource driven by mock_score. Reports raw logits as the
/// top tokens "Yes" and "No" plus two filler tokens. Instrumented so tests can
/// observe concurrency.
class MockLogprobSource final : public LogprobSource {
public:
    explicit MockLogprobSource(const MockLexicon& lexicon = MockLexicon::builtin(),
                               std::chrono::microseconds delay = {});

    LogprobResponse first_token_scores(const PromptRender& prompt) const override;
    bool reachable() const override { return true; }

    int peak_in_flight() const noexcept { return peak_.load(); }
    long calls() const noexcept { return calls_.load(); }

private:
    const MockLexicon* lexicon_;
    std::chrono::microseconds delay_;
    mutable std::atomic<int> current_{0};
    mutable std::atomic<int> peak_{0};
    mutable std::atomic<long> calls_{0};
};

/// Top tokens the mock reports for a rendered prompt.
LogprobResponse mock_logprob_response(const PromptRender& prompt, const MockLexicon& lexicon);

/// Deterministic movie-review "generation" for a QD prompt. Reads the
/// sentiment word and the category trigger out of the prompt and assembles a
/// text from the lexicon, varied by seed.
std::string mock_generate(std::string_view prompt, std::uint64_t seed,
                          const MockLexicon& lexicon = MockLexicon::builtin());

}  // namespace zyn
