#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "zyn/reward.hpp"

namespace zyn {

/// The exact prompt sent to the critic model for one (text, question) pair.
struct PromptRender {
    std::string text;

    friend bool operator==(const PromptRender&, const PromptRender&) = default;
};

/// "Text: " + o + "\n\n " + q.text + " Response:". Throws EmptyText for an empty o.
PromptRender render_prompt(std::string_view o, const Question& q);

struct ParsedPrompt {
    std::string text;
    std::string question;
};

/// Inverse of render_prompt, splitting at the last "\n\n ". Used by the mock
/// backends, which only see the rendered prompt.
std::optional<ParsedPrompt> parse_prompt(std::string_view prompt);

}  // namespace zyn
