#include "zyn/mock.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "zyn/error.hpp"
#include "zyn/prompt.hpp"

namespace zyn {

namespace detail {
// Generated at configure time from data/mock/*.tsv.
const std::vector<std::pair<std::string_view, std::string_view>>& builtin_mock_tables();
}  // namespace detail

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<std::string> words_with_sign(const KeywordTable* table, int sign) {
    std::vector<std::string> out;
    if (!table) return out;
    for (const auto& [w, weight] : table->words) {
        if ((sign > 0 && weight > 0) || (sign < 0 && weight < 0)) out.push_back(w);
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

}  // namespace

double KeywordTable::weight_of(std::string_view word) const {
    for (const auto& [w, weight] : words) {
        if (w == word) return weight;
    }
    return 0.0;
}

KeywordTable parse_keyword_table(std::string name, std::string_view tsv) {
    KeywordTable table;
    table.name = std::move(name);
    std::size_t line_no = 0;
    while (!tsv.empty()) {
        const auto nl = tsv.find('\n');
        std::string_view line = tsv.substr(0, nl);
        tsv = nl == std::string_view::npos ? std::string_view{} : tsv.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) continue;
        if (line.front() == '#') {
            std::string_view body = trim(line.substr(1));
            if (body.starts_with("trigger:")) table.triggers.push_back(lower(trim(body.substr(8))));
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos)
            throw Error(ErrorCode::InvalidConfig, table.name + ":" + std::to_string(line_no) +
                                                      ": expected word<TAB>weight");
        const std::string_view weight_text = trim(line.substr(tab + 1));
        double weight = 0.0;
        const auto [ptr, ec] =
            std::from_chars(weight_text.data(), weight_text.data() + weight_text.size(), weight);
        if (ec != std::errc{} || ptr != weight_text.data() + weight_text.size() || !std::isfinite(weight))
            throw Error(ErrorCode::InvalidConfig,
                        table.name + ":" + std::to_string(line_no) + ": bad weight");
        table.words.emplace_back(lower(trim(line.substr(0, tab))), weight);
    }
    return table;
}

MockLexicon::MockLexicon(std::vector<KeywordTable> tables) : tables_(std::move(tables)) {
    const auto it = std::find_if(tables_.begin(), tables_.end(),
                                 [](const KeywordTable& t) { return t.name == "sentiment"; });
    if (it == tables_.end())
        throw Error(ErrorCode::InvalidConfig, "mock lexicon needs a table named 'sentiment'");
    default_index_ = static_cast<std::size_t>(it - tables_.begin());
}

const MockLexicon& MockLexicon::builtin() {
    static const MockLexicon lexicon = [] {
        std::vector<KeywordTable> tables;
        for (const auto& [name, tsv] : detail::builtin_mock_tables())
            tables.push_back(parse_keyword_table(std::string(name), tsv));
        return MockLexicon(std::move(tables));
    }();
    return lexicon;
}

MockLexicon MockLexicon::load(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".tsv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<KeywordTable> tables;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read " + f.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        tables.push_back(parse_keyword_table(f.stem().string(), ss.str()));
    }
    return MockLexicon(std::move(tables));
}

const KeywordTable* MockLexicon::match_trigger(std::string_view text) const {
    const std::string needle_space = lower(text);
    for (const auto& t : tables_) {
        for (const auto& trig : t.triggers) {
            if (needle_space.find(trig) != std::string::npos) return &t;
        }
    }
    return nullptr;
}

const KeywordTable& MockLexicon::table_for(std::string_view question) const {
    if (const auto* t = match_trigger(question)) return *t;
    return tables_[default_index_];
}

const KeywordTable* MockLexicon::find(std::string_view name) const {
    for (const auto& t : tables_) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

std::vector<std::string> mock_words(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '\'') {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

double question_hash_unit(std::string_view question) noexcept {
    const double u = static_cast<double>(fnv1a(question) >> 11) * 0x1.0p-53;  // [0, 1)
    return 2.0 * u - 1.0;
}

LogitPair mock_score(std::string_view o, const Question& q) {
    return mock_score(o, q, MockLexicon::builtin());
}

LogitPair mock_score(std::string_view o, const Question& q, const MockLexicon& lexicon) {
    const KeywordTable& table = lexicon.table_for(q.text);
    double hits = 0.0;
    for (const auto& w : mock_words(o)) hits += table.weight_of(w);
    const double v_yes = 2.0 * hits + 0.1 * std::clamp(question_hash_unit(q.text), -1.0, 1.0);
    return {v_yes, -v_yes};
}

LogprobResponse mock_logprob_response(const PromptRender& prompt, const MockLexicon& lexicon) {
    const auto parsed = parse_prompt(prompt.text);
    if (!parsed) throw Error(ErrorCode::BackendProtocolError, "mock cannot parse prompt");
    if (parsed->text.find(kMockMalformedMarker) != std::string::npos)
        throw Error(ErrorCode::BackendProtocolError, "mock produced a malformed response");

    LogprobResponse out;
    if (parsed->text.find(kMockNoYesNoMarker) != std::string::npos) {
        out.top_tokens = {{"The", -1.0}, {"I", -2.0}};
        return out;
    }
    const LogitPair pair = mock_score(parsed->text, Question{parsed->question}, lexicon);
    const double floor = std::min(pair.v_yes, pair.v_no);
    out.top_tokens = {{"Yes", pair.v_yes}, {"No", pair.v_no}, {"The", floor - 1.0}, {"I", floor - 2.0}};
    return out;
}

MockLogprobSource::MockLogprobSource(const MockLexicon& lexicon, std::chrono::microseconds delay)
    : lexicon_(&lexicon), delay_(delay) {}

LogprobResponse MockLogprobSource::first_token_scores(const PromptRender& prompt) const {
    ++calls_;
    const int now = ++current_;
    int seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    struct Leave {
        std::atomic<int>& c;
        ~Leave() { --c; }
    } leave{current_};
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    return mock_logprob_response(prompt, *lexicon_);
}

std::string mock_generate(std::string_view prompt, std::uint64_t seed, const MockLexicon& lexicon) {
    std::uint64_t state = fnv1a(prompt) ^ (seed * 0xD1B54A32D192ED03ULL);
    auto next = [&state] { return splitmix64(state); };

    const std::string p = lower(prompt);
    int level = 0;
    if (p.find("very negative") != std::string::npos) level = -2;
    else if (p.find("very positive") != std::string::npos) level = 2;
    else if (p.find("negative") != std::string::npos) level = -1;
    else if (p.find("positive") != std::string::npos) level = 1;

    if (next() % 12 == 0) return "I am sorry, but I am unable to write that review. Which film do you mean?";

    auto pick = [&](const std::vector<std::string>& pool, std::size_t count) {
        std::vector<std::string> out;
        if (pool.empty()) return out;
        for (std::size_t i = 0; i < count; ++i) out.push_back(pool[next() % pool.size()]);
        return out;
    };

    const KeywordTable* topic = lexicon.match_trigger(prompt);
    const auto topic_words = pick(words_with_sign(topic, +1), 1 + next() % 2);

    const KeywordTable* sentiment = lexicon.find("sentiment");
    const auto pos = words_with_sign(sentiment, +1);
    const auto neg = words_with_sign(sentiment, -1);
    std::vector<std::string> feel;
    if (level == 0) {
        if (next() % 2) feel.push_back(pick(pos, 1).front());
        if (next() % 2) feel.push_back(pick(neg, 1).front());
    } else {
        const std::size_t n = static_cast<std::size_t>(std::abs(level)) + (next() % 3 == 0 ? 1 : 0);
        feel = pick(level > 0 ? pos : neg, n);
    }
    const auto quality = pick(words_with_sign(lexicon.find("quality"), +1), next() % 4);

    std::string text = "This review looks at the ";
    text += topic_words.empty() ? "film" : join(topic_words, " and ");
    text += ". In short it felt ";
    text += feel.empty() ? "fine" : join(feel, ", ");
    text += ".";
    if (!quality.empty()) text += " The " + join(quality, " and ") + " deserve a mention.";
    return text;
}

}  // namespace zyn
