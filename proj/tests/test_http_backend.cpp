#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "refine/http_backend.hpp"
#include "refine/stub_server.hpp"

#include <cstdlib>

#include "json.hpp"

using namespace refine;

namespace {

const char* kCannedBody =
    R"({"choices":[{"message":{"role":"assistant","content":"London"}}],)"
    R"("usage":{"prompt_tokens":12,"completion_tokens":3,"total_tokens":15}})";

ChatRequest sample_request() {
    ChatRequest request;
    request.model = "gpt-3.5-turbo";
    request.messages = {ChatMessage{"user", "Where were the 2012 Olympics held?"}};
    request.temperature = 0.7;
    request.kind_tag = PromptKind::InitialAnswer;
    return request;
}

HttpConfig stub_config(const StubServer& stub) {
    HttpConfig config;
    config.base_url = stub.base_url();
    config.api_key = "test-key";
    config.request_timeout = std::chrono::seconds{5};
    config.retry.base_delay = std::chrono::milliseconds{2};
    config.rng_seed = 1234;
    return config;
}

} // namespace

TEST_CASE("content and usage are extracted from the wire") {
    StubServer stub({StubFixture{200, kCannedBody}});
    HttpBackend backend(stub_config(stub));
    const auto response = backend.complete(sample_request());
    CHECK(response.content == "London");
    CHECK(response.usage == TokenUsage::of(12, 3));
    CHECK(stub.request_count() == 1);
}

TEST_CASE("outbound body carries model, messages and temperature") {
    StubServer stub({StubFixture{200, kCannedBody}});
    HttpBackend backend(stub_config(stub));
    backend.complete(sample_request());

    const auto bodies = stub.recorded_bodies();
    REQUIRE(bodies.size() == 1);
    const auto body = nlohmann::json::parse(bodies[0]);
    CHECK(body["model"] == "gpt-3.5-turbo");
    CHECK(body["temperature"] == doctest::Approx(0.7));
    REQUIRE(body["messages"].is_array());
    REQUIRE(body["messages"].size() == 1);
    CHECK(body["messages"][0]["role"] == "user");
    CHECK(body["messages"][0]["content"] == "Where were the 2012 Olympics held?");
    CHECK_FALSE(body.contains("kind_tag"));
}

TEST_CASE("429 responses are retried until success") {
    const char* limited = R"({"error":{"message":"rate limited"}})";
    StubServer stub({StubFixture{429, limited}, StubFixture{429, limited},
                     StubFixture{200, kCannedBody}});
    HttpBackend backend(stub_config(stub));
    const auto response = backend.complete(sample_request());
    CHECK(response.content == "London");
    CHECK(stub.request_count() == 3);
}

TEST_CASE("server errors are retried, then surfaced") {
    SUBCASE("recovers") {
        StubServer stub({StubFixture{503, "{}"}, StubFixture{200, kCannedBody}});
        HttpBackend backend(stub_config(stub));
        CHECK(backend.complete(sample_request()).content == "London");
        CHECK(stub.request_count() == 2);
    }
    SUBCASE("gives up after max attempts") {
        StubServer stub(std::vector<StubFixture>(5, StubFixture{500, "{}"}));
        auto config = stub_config(stub);
        config.retry.max_attempts = 3;
        HttpBackend backend(config);
        CHECK_THROWS_AS(backend.complete(sample_request()), ServerError);
        CHECK(stub.request_count() == 3);
    }
    SUBCASE("rate limit exhausts to RateLimited") {
        StubServer stub(std::vector<StubFixture>(5, StubFixture{429, "{}"}));
        auto config = stub_config(stub);
        config.retry.max_attempts = 2;
        HttpBackend backend(config);
        CHECK_THROWS_AS(backend.complete(sample_request()), RateLimited);
        CHECK(stub.request_count() == 2);
    }
}

TEST_CASE("auth failures are terminal") {
    for (const int status : {401, 403}) {
        StubServer stub({StubFixture{status, R"({"error":"no"})"}});
        HttpBackend backend(stub_config(stub));
        CHECK_THROWS_AS(backend.complete(sample_request()), AuthError);
        CHECK(stub.request_count() == 1); // no retry
    }
}

TEST_CASE("unexpected statuses fail without retry") {
    StubServer stub({StubFixture{404, "{}"}});
    HttpBackend backend(stub_config(stub));
    CHECK_THROWS_AS(backend.complete(sample_request()), ServerError);
    CHECK(stub.request_count() == 1);
}

TEST_CASE("malformed bodies raise MalformedResponse") {
    SUBCASE("missing choices") {
        StubServer stub({StubFixture{200, R"({"usage":{}})"}});
        HttpBackend backend(stub_config(stub));
        CHECK_THROWS_AS(backend.complete(sample_request()), MalformedResponse);
    }
    SUBCASE("not json") {
        StubServer stub({StubFixture{200, "<html>oops</html>", "text/html"}});
        HttpBackend backend(stub_config(stub));
        CHECK_THROWS_AS(backend.complete(sample_request()), MalformedResponse);
    }
    SUBCASE("empty choices array") {
        StubServer stub({StubFixture{200, R"({"choices":[]})"}});
        HttpBackend backend(stub_config(stub));
        CHECK_THROWS_AS(backend.complete(sample_request()), MalformedResponse);
    }
}

TEST_CASE("usage may be partially or fully absent") {
    SUBCASE("absent entirely") {
        StubServer stub(
            {StubFixture{200, R"({"choices":[{"message":{"content":"hi"}}]})"}});
        HttpBackend backend(stub_config(stub));
        const auto response = backend.complete(sample_request());
        CHECK_FALSE(response.usage.prompt_tokens.has_value());
        CHECK_FALSE(response.usage.total_tokens.has_value());
    }
    SUBCASE("total only: components stay unknown") {
        StubServer stub({StubFixture{
            200,
            R"({"choices":[{"message":{"content":"hi"}}],"usage":{"total_tokens":9}})"}});
        HttpBackend backend(stub_config(stub));
        const auto response = backend.complete(sample_request());
        CHECK_FALSE(response.usage.prompt_tokens.has_value());
        CHECK(response.usage.total_tokens == 9);
    }
    SUBCASE("components only: total derived") {
        StubServer stub({StubFixture{
            200, R"({"choices":[{"message":{"content":"hi"}}],)"
                 R"("usage":{"prompt_tokens":4,"completion_tokens":2}})"}});
        HttpBackend backend(stub_config(stub));
        CHECK(backend.complete(sample_request()).usage == TokenUsage::of(4, 2));
    }
}

TEST_CASE("connection refusal raises TransportError") {
    HttpConfig config;
    config.base_url = "http://127.0.0.1:9"; // discard port, nothing listens
    config.request_timeout = std::chrono::seconds{2};
    HttpBackend backend(config);
    CHECK_THROWS_AS(backend.complete(sample_request()), TransportError);
}

TEST_CASE("wire serialization is a fixed point") {
    const auto request = sample_request();
    const std::string once = to_wire(request);
    const std::string twice = to_wire(chat_request_from_wire(once));
    CHECK(once == twice);

    CHECK_THROWS_AS(chat_request_from_wire("{}"), MalformedResponse);
    CHECK_THROWS_AS(chat_request_from_wire("not json"), MalformedResponse);
}

TEST_CASE("retry delay caps are non-decreasing and bound the jitter") {
    RetryPolicy policy; // defaults: 5 attempts, 1s base, factor 2
    CHECK(policy.max_attempts == 5);
    CHECK(policy.cap_for(1) == std::chrono::milliseconds{1000});
    CHECK(policy.cap_for(2) == std::chrono::milliseconds{2000});
    CHECK(policy.cap_for(3) == std::chrono::milliseconds{4000});
    CHECK(policy.cap_for(4) == std::chrono::milliseconds{8000});
    for (int retry = 1; retry < 10; ++retry) {
        CHECK(policy.cap_for(retry) <= policy.cap_for(retry + 1));
    }
}

TEST_CASE("stub serves fixtures in order and diagnoses exhaustion") {
    StubServer stub({StubFixture{200, kCannedBody}});
    auto config = stub_config(stub);
    config.retry.max_attempts = 1;
    HttpBackend backend(config);
    CHECK(backend.complete(sample_request()).content == "London");
    CHECK_THROWS_AS(backend.complete(sample_request()), ServerError);
    CHECK(stub.request_count() == 2);
}

TEST_CASE("stub requires at least one fixture") {
    CHECK_THROWS_AS(StubServer({}), std::invalid_argument);
}

TEST_CASE("config comes from the environment") {
    setenv("REFINE_BASE_URL", "http://example.test/v9", 1);
    setenv("REFINE_API_KEY", "primary-key", 1);
    setenv("OPENAI_API_KEY", "fallback-key", 1);
    auto config = HttpConfig::from_env();
    CHECK(config.base_url == "http://example.test/v9");
    CHECK(config.api_key == "primary-key");

    unsetenv("REFINE_API_KEY");
    config = HttpConfig::from_env();
    CHECK(config.api_key == "fallback-key");

    unsetenv("OPENAI_API_KEY");
    unsetenv("REFINE_BASE_URL");
    config = HttpConfig::from_env();
    CHECK(config.base_url == "https://api.openai.com/v1");
    CHECK(config.api_key.empty());
}
