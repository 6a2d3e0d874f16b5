#include <gtest/gtest.h>

#include <json.hpp>

#include "zyn/io.hpp"
#include "zyn/prompt.hpp"

using namespace zyn;

TEST(RenderPrompt, GoldenFixtures) {
    const auto golden = nlohmann::json::parse(io::read_file(ZYN_TEST_FIXTURES "/prompt_golden.json"));
    ASSERT_EQ(golden.size(), 5u);
    for (const auto& g : golden) {
        const auto r = render_prompt(g.at("o").get<std::string>(), Question{g.at("q").get<std::string>()});
        EXPECT_EQ(r.text, g.at("expected").get<std::string>());
    }
}

TEST(RenderPrompt, ByteExactMinimal) {
    const auto r = render_prompt("x", Question{"Q?"});
    const std::string expected{'T', 'e', 'x', 't', ':', ' ', 'x', '\n', '\n', ' ',
                               'Q', '?', ' ', 'R', 'e', 's', 'p', 'o', 'n', 's', 'e', ':'};
    EXPECT_EQ(r.text, expected);
    EXPECT_EQ(render_prompt("x", Question{"Q?"}), r);
}

TEST(RenderPrompt, EmptyTextRejected) {
    try {
        render_prompt("", Question{"Q?"});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyText);
    }
}

TEST(RenderPrompt, PrefixAndSuffix) {
    for (const std::string o : {"a", "Text: nested", "multi\n\n paragraph", "Response: early"}) {
        const auto t = render_prompt(o, Question{"Is it?"}).text;
        EXPECT_EQ(t.rfind("Text: ", 0), 0u);
        EXPECT_TRUE(t.ends_with("Response:"));
    }
}

TEST(ParsePrompt, InvertsRender) {
    for (const std::string o : {"great movie", "multi\n\n paragraph body", "x"}) {
        const auto parsed = parse_prompt(render_prompt(o, Question{"Is this movie review positive?"}).text);
        ASSERT_TRUE(parsed.has_value());
        EXPECT_EQ(parsed->text, o);
        EXPECT_EQ(parsed->question, "Is this movie review positive?");
    }
    EXPECT_FALSE(parse_prompt("no template here").has_value());
}
