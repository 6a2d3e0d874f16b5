#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>

#include "zyn/io.hpp"
#include "zyn/json_io.hpp"

using namespace zyn;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("zyn_io_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST(Io, AtomicWriteReplacesAndLeavesNoTemp) {
    const auto dir = scratch_dir("atomic");
    const auto path = dir / "nested" / "out.jsonl";
    io::write_file_atomic(path, "{\"a\":1}\n");
    io::write_file_atomic(path, "{\"a\":2}\n\n{\"b\":3}\n");
    EXPECT_EQ(io::read_file(path), "{\"a\":2}\n\n{\"b\":3}\n");
    EXPECT_FALSE(fs::exists(path.string() + ".tmp"));
    const auto rows = io::read_jsonl(path);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1].at("b"), 3);
    fs::remove_all(dir);
}

TEST(Io, ErrorsNameTheFile) {
    const auto dir = scratch_dir("errors");
    try {
        io::read_file(dir / "missing.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("missing.json"), std::string::npos);
    }
    io::write_file_atomic(dir / "bad.jsonl", "{\"ok\":1}\n{not json\n");
    try {
        io::read_jsonl(dir / "bad.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("bad.jsonl:2"), std::string::npos);
    }
    fs::remove_all(dir);
}

TEST(JsonIo, QuestionsSchema) {
    const auto qs = parse_questions(json::parse(R"([
        {"text": "Is this movie review positive?"},
        {"text": "Is this movie review negative?", "polarity": "negated", "weight": 0.5}])"));
    ASSERT_EQ(qs.size(), 2u);
    EXPECT_EQ(qs[0].polarity, Polarity::Affirmative);
    EXPECT_EQ(qs[0].weight, 1.0);
    EXPECT_EQ(qs[1].polarity, Polarity::Negated);
    EXPECT_EQ(qs[1].weight, 0.5);
    EXPECT_EQ(json(qs[1]).at("polarity"), "negated");

    for (const char* bad : {R"({"text":"x"})", R"([{"polarity":"negated"}])", R"([{"text":""}])",
                            R"([{"text":"x","weight":-1}])", R"([{"text":"x","polarity":"maybe"}])"}) {
        try {
            parse_questions(json::parse(bad));
            ADD_FAILURE() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidSpec) << bad;
        }
    }
}

TEST(JsonIo, BackendConfigRoundTripOmitsKey) {
    BackendConfig c;
    c.base_url = "http://127.0.0.1:9000";
    c.api_key = "secret";
    c.timeout = std::chrono::milliseconds(1234);
    c.max_in_flight = 3;
    const json j = c;
    EXPECT_FALSE(j.contains("api_key"));
    EXPECT_EQ(j.at("timeout_ms"), 1234);
    const auto back = j.get<BackendConfig>();
    EXPECT_EQ(back.base_url, c.base_url);
    EXPECT_EQ(back.timeout, c.timeout);
    EXPECT_EQ(back.max_in_flight, 3);
    EXPECT_FALSE(back.api_key.has_value());
}

TEST(JsonIo, RewardSpecDefaultsAndValidation) {
    const auto s = json::object().get<RewardSpec>();
    EXPECT_EQ(s.variant, RewardVariant::BtProb);
    EXPECT_EQ(s.k_s, 10.0);
    EXPECT_EQ(s.k_c, 0.5);
    EXPECT_THROW((json{{"variant", "scaled"}, {"k_s", 0}}.get<RewardSpec>()), Error);
}
