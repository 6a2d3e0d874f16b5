#pragma once

#include <memory>
#include <string>

#include "zyn/mock.hpp"

namespace zyn {

/// Completions-protocol HTTP server backed by the keyword mock. Requests
/// with max_tokens == 1 and a logprobs field get first-token scores; all
/// others get a mock_generate text. Texts carrying kMockMalformedMarker get
/// an unparseable 200 body.
class MockCompletionServer {
public:
    explicit MockCompletionServer(const MockLexicon& lexicon = MockLexicon::builtin());
    ~MockCompletionServer();
    MockCompletionServer(const MockCompletionServer&) = delete;
    MockCompletionServer& operator=(const MockCompletionServer&) = delete;

    /// Binds (port 0 picks a free port) and serves on a background thread.
    /// Returns the bound port.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    /// Serves on the calling thread until stop() is called from elsewhere.
    void listen_blocking(const std::string& host, int port);
    void stop();

    std::string base_url() const;
    long requests() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace zyn
