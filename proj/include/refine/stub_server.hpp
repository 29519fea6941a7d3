#pragma once

#include <memory>
#include <string>
#include <vector>

namespace refine {

/// One canned wire-level reply served by the stub.
struct StubFixture {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// Local chat-completions endpoint for wire-conformance tests: serves the
/// fixtures in order on POST /chat/completions, records every received
/// request body, and answers 500 with a diagnostic once fixtures run out.
/// Listens on an ephemeral 127.0.0.1 port; shuts down on destruction.
class StubServer {
public:
    explicit StubServer(std::vector<StubFixture> fixtures);
    ~StubServer();

    StubServer(const StubServer&) = delete;
    StubServer& operator=(const StubServer&) = delete;

    int port() const;
    std::string base_url() const; // http://127.0.0.1:<port>

    std::vector<std::string> recorded_bodies() const;
    std::size_t request_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace refine
