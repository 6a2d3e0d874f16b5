#include <gtest/gtest.h>

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <thread>

#include "zyn/backend.hpp"
#include "zyn/generation.hpp"
#include "zyn/http_transport.hpp"
#include "zyn/mock.hpp"
#include "zyn/mock_server.hpp"
#include "zyn/prompt.hpp"

using namespace zyn;
using json = nlohmann::json;

namespace {

const Question kPositive{"Is this movie review positive?"};

// A scripted completions endpoint on an ephemeral port.
class ScriptedServer {
public:
    using Handler = std::function<void(const httplib::Request&, httplib::Response&, int attempt)>;

    explicit ScriptedServer(Handler handler) : handler_(std::move(handler)) {
        server_.Post("/v1/completions", [this](const httplib::Request& req, httplib::Response& res) {
            const int attempt = hits_.fetch_add(1);
            {
                std::lock_guard lock(mu_);
                last_auth_ = req.get_header_value("Authorization");
                last_body_ = req.body;
            }
            handler_(req, res, attempt);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~ScriptedServer() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    int hits() const { return hits_.load(); }
    std::string last_auth() const {
        std::lock_guard lock(mu_);
        return last_auth_;
    }
    std::string last_body() const {
        std::lock_guard lock(mu_);
        return last_body_;
    }

private:
    Handler handler_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> hits_{0};
    mutable std::mutex mu_;
    std::string last_auth_, last_body_;
};

std::string logprob_body(double yes, double no) {
    return json{{"choices", {{{"text", " Yes"}, {"logprobs", {{"top_logprobs", {{{" Yes", yes}, {" No", no}}}}}}}}}}
        .dump();
}

BackendConfig http_config(const std::string& url) {
    BackendConfig cfg;
    cfg.base_url = url;
    cfg.timeout = std::chrono::milliseconds(500);
    cfg.backoff_base = std::chrono::milliseconds(1);
    cfg.max_retries = 2;
    return cfg;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Endpoint, ParseBaseUrl) {
    const auto e = http::parse_base_url("http://127.0.0.1:8000/api/");
    EXPECT_EQ(e.scheme_host_port, "http://127.0.0.1:8000");
    EXPECT_EQ(e.path_prefix, "/api");
    EXPECT_EQ(http::parse_base_url("http://host:1").path_prefix, "");
    EXPECT_THROW(http::parse_base_url("127.0.0.1:8000"), Error);
}

TEST(HttpBackend, RequestShapeAndAuth) {
    ScriptedServer server([](const httplib::Request&, httplib::Response& res, int) {
        res.set_content(logprob_body(-0.2, -1.9), "application/json");
    });
    auto cfg = http_config(server.url());
    cfg.api_key = "sk-local";
    cfg.model_id = "critic";
    cfg.top_k = 7;
    const auto client = LogitClient::from_config(cfg);
    EXPECT_EQ(client.fetch_logits("great movie", kPositive), (LogitPair{-0.2, -1.9}));
    EXPECT_EQ(server.last_auth(), "Bearer sk-local");
    const auto body = json::parse(server.last_body());
    EXPECT_EQ(body.at("model"), "critic");
    EXPECT_EQ(body.at("prompt"), "Text: great movie\n\n Is this movie review positive? Response:");
    EXPECT_EQ(body.at("max_tokens"), 1);
    EXPECT_EQ(body.at("logprobs"), 7);
}

TEST(HttpBackend, NoAuthHeaderWithoutKey) {
    ScriptedServer server([](const httplib::Request&, httplib::Response& res, int) {
        res.set_content(logprob_body(0.0, 0.0), "application/json");
    });
    LogitClient::from_config(http_config(server.url())).fetch_logits("x", kPositive);
    EXPECT_EQ(server.last_auth(), "");
}

TEST(HttpBackend, RetriesServerErrorsThenSucceeds) {
    ScriptedServer server([](const httplib::Request&, httplib::Response& res, int attempt) {
        if (attempt < 2) {
            res.status = 503;
            return;
        }
        res.set_content(logprob_body(1.0, -1.0), "application/json");
    });
    const auto client = LogitClient::from_config(http_config(server.url()));
    EXPECT_EQ(client.fetch_logits("x", kPositive), (LogitPair{1.0, -1.0}));
    EXPECT_EQ(server.hits(), 3);
}

TEST(HttpBackend, ExhaustedRetriesAreTimeout) {
    ScriptedServer server([](const httplib::Request&, httplib::Response& res, int) { res.status = 500; });
    const auto client = LogitClient::from_config(http_config(server.url()));
    EXPECT_EQ(code_of([&] { client.fetch_logits("x", kPositive); }), ErrorCode::BackendTimeout);
    EXPECT_EQ(server.hits(), 3);
}

TEST(HttpBackend, ClientErrorIsNotRetried) {
    ScriptedServer server([](const httplib::Request&, httplib::Response& res, int) {
        res.status = 400;
        res.set_content(R"({"error":"bad"})", "application/json");
    });
    const auto client = LogitClient::from_config(http_config(server.url()));
    EXPECT_EQ(code_of([&] { client.fetch_logits("x", kPositive); }), ErrorCode::BackendProtocolError);
    EXPECT_EQ(server.hits(), 1);
}

TEST(HttpBackend, SlowServerTimesOutWithinBudget) {
    ScriptedServer server([](const httplib::Request&, httplib::Response& res, int) {
        std::this_thread::sleep_for(std::chrono::milliseconds(400));
        res.set_content(logprob_body(0.0, 0.0), "application/json");
    });
    auto cfg = http_config(server.url());
    cfg.timeout = std::chrono::milliseconds(100);
    cfg.max_retries = 1;
    const auto client = LogitClient::from_config(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    EXPECT_EQ(code_of([&] { client.fetch_logits("x", kPositive); }), ErrorCode::BackendTimeout);
    const auto elapsed = std::chrono::steady_clock::now() - t0;
    EXPECT_LT(elapsed, std::chrono::milliseconds(2000));
    EXPECT_EQ(server.hits(), 2);
}

TEST(HttpBackend, UnreachableIsTimeoutAndProbeFalse) {
    auto cfg = http_config("http://127.0.0.1:1");
    cfg.max_retries = 0;
    const auto client = LogitClient::from_config(cfg);
    EXPECT_EQ(code_of([&] { client.fetch_logits("x", kPositive); }), ErrorCode::BackendTimeout);
    EXPECT_FALSE(client.backend_reachable());
}

TEST(HttpBackend, MissingYesNoCarriesTopK) {
    ScriptedServer server([](const httplib::Request&, httplib::Response& res, int) {
        res.set_content(R"({"choices":[{"logprobs":{"top_logprobs":[{"The":-0.1,"A":-2.5}]}}]})",
                        "application/json");
    });
    try {
        LogitClient::from_config(http_config(server.url())).fetch_logits("x", kPositive);
        FAIL();
    } catch (const TokenNotFoundError& e) {
        EXPECT_EQ(e.top_tokens().size(), 2u);
    }
}

TEST(MockServer, ScoringMatchesInProcessMock) {
    MockCompletionServer server;
    server.start();
    const auto client = LogitClient::from_config(http_config(server.base_url()));
    EXPECT_TRUE(client.backend_reachable());
    for (const std::string o : {"A great and superb film.", "Boring.", "The villain was wooden."}) {
        EXPECT_EQ(client.fetch_logits(o, kPositive), mock_score(o, kPositive)) << o;
    }
    EXPECT_EQ(code_of([&] { client.fetch_logits("[[malformed]]", kPositive); }),
              ErrorCode::BackendProtocolError);
    EXPECT_EQ(code_of([&] { client.fetch_logits("[[no-yes-no]]", kPositive); }), ErrorCode::TokenNotFound);
    server.stop();
}

TEST(MockServer, GenerationMatchesInProcessGenerator) {
    MockCompletionServer server;
    server.start();
    GenerationBackendConfig http;
    http.base_url = server.base_url();
    GenerationBackendConfig local;
    local.mock = true;
    const auto remote = make_generator(http);
    const auto inproc = make_generator(local);
    const std::string prompt = "### Human: Generate a positive movie review, with focus on plot.";
    for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) EXPECT_EQ(remote->generate(prompt, seed), inproc->generate(prompt, seed));
    EXPECT_EQ(inproc->generate(prompt, 3), mock_generate(prompt, 3));
    server.stop();
}
