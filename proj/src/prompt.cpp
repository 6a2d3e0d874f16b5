#include "zyn/prompt.hpp"

#include "zyn/error.hpp"

namespace zyn {

namespace {
constexpr std::string_view kPrefix = "Text: ";
constexpr std::string_view kSeparator = "\n\n ";
constexpr std::string_view kSuffix = " Response:";
}  // namespace

PromptRender render_prompt(std::string_view o, const Question& q) {
    if (o.empty()) throw Error(ErrorCode::EmptyText, "text to score is empty");
    std::string out;
    out.reserve(kPrefix.size() + o.size() + kSeparator.size() + q.text.size() + kSuffix.size());
    out.append(kPrefix).append(o).append(kSeparator).append(q.text).append(kSuffix);
    return {std::move(out)};
}

std::optional<ParsedPrompt> parse_prompt(std::string_view prompt) {
    if (!prompt.starts_with(kPrefix) || !prompt.ends_with(kSuffix)) return std::nullopt;
    const std::string_view body =
        prompt.substr(kPrefix.size(), prompt.size() - kPrefix.size() - kSuffix.size());
    const auto sep = body.rfind(kSeparator);
    if (sep == std::string_view::npos) return std::nullopt;
    return ParsedPrompt{std::string(body.substr(0, sep)),
                        std::string(body.substr(sep + kSeparator.size()))};
}

}  // namespace zyn
