#include "zyn/mock_server.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <thread>

#include "zyn/error.hpp"
#include "zyn/prompt.hpp"

namespace zyn {

using json = nlohmann::json;

struct MockCompletionServer::Impl {
    const MockLexicon* lexicon;
    httplib::Server server;
    std::thread thread;
    std::string host = "127.0.0.1";
    int port = 0;
    std::atomic<long> requests{0};

    void install() {
        server.Post("/v1/completions", [this](const httplib::Request& req, httplib::Response& res) {
            ++requests;
            json body;
            try {
                body = json::parse(req.body);
            } catch (const json::exception&) {
                res.status = 400;
                res.set_content(R"({"error":{"message":"body is not JSON"}})", "application/json");
                return;
            }
            const std::string prompt = body.value("prompt", std::string{});
            const int max_tokens = body.value("max_tokens", 16);
            const std::string model = body.value("model", std::string{"mock"});

            if (max_tokens == 1 && body.contains("logprobs")) {
                if (prompt.find(kMockMalformedMarker) != std::string::npos) {
                    res.set_content("{\"choices\": [", "application/json");
                    return;
                }
                LogprobResponse scores;
                try {
                    scores = mock_logprob_response(PromptRender{prompt}, *lexicon);
                } catch (const Error& e) {
                    res.status = 400;
                    res.set_content(json{{"error", {{"message", e.what()}}}}.dump(), "application/json");
                    return;
                }
                json top = json::object();
                for (const auto& t : scores.top_tokens) top[t.token] = t.score;
                const std::string first = scores.top_tokens.empty() ? "" : scores.top_tokens.front().token;
                const json out = {
                    {"object", "text_completion"},
                    {"model", model},
                    {"choices", json::array({{{"index", 0},
                                              {"text", first},
                                              {"logprobs", {{"tokens", json::array({first})},
                                                            {"top_logprobs", json::array({top})}}},
                                              {"finish_reason", "length"}}})},
                };
                res.set_content(out.dump(), "application/json");
                return;
            }

            const std::uint64_t seed = body.value("seed", std::uint64_t{0});
            const json out = {
                {"object", "text_completion"},
                {"model", model},
                {"choices", json::array({{{"index", 0},
                                          {"text", mock_generate(prompt, seed, *lexicon)},
                                          {"finish_reason", "stop"}}})},
            };
            res.set_content(out.dump(), "application/json");
        });
        server.Get("/v1/models", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"object":"list","data":[{"id":"mock","object":"model"}]})",
                            "application/json");
        });
    }
};

MockCompletionServer::MockCompletionServer(const MockLexicon& lexicon) : impl_(std::make_unique<Impl>()) {
    impl_->lexicon = &lexicon;
    impl_->install();
}

MockCompletionServer::~MockCompletionServer() { stop(); }

int MockCompletionServer::start(const std::string& host, int port) {
    impl_->host = host;
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port(host);
    } else {
        if (!impl_->server.bind_to_port(host, port)) impl_->port = -1;
        else impl_->port = port;
    }
    if (impl_->port <= 0) throw Error(ErrorCode::InvalidConfig, "mock server cannot bind " + host);
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void MockCompletionServer::listen_blocking(const std::string& host, int port) {
    impl_->host = host;
    impl_->port = port;
    if (!impl_->server.listen(host, port))
        throw Error(ErrorCode::InvalidConfig, "mock server cannot listen on " + host + ":" + std::to_string(port));
}

void MockCompletionServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockCompletionServer::base_url() const {
    return "http://" + impl_->host + ":" + std::to_string(impl_->port);
}

long MockCompletionServer::requests() const { return impl_->requests.load(); }

}  // namespace zyn
