#pragma once

#include "refine/backend.hpp"

#include <mutex>
#include <random>

namespace refine {

/// Exponential backoff with full jitter: the delay cap for retry k is
/// base * factor^(k-1) (a non-decreasing sequence); each sleep is drawn
/// uniformly from [0, cap].
struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds base_delay{1000};
    double factor = 2.0;
    bool full_jitter = true;

    /// Cap before the given retry (attempt counts from 1; the first retry
    /// waits at most base_delay).
    std::chrono::milliseconds cap_for(int retry) const;
};

struct HttpConfig {
    std::string base_url; // e.g. "https://api.openai.com/v1"
    std::string api_key;
    std::chrono::seconds request_timeout{60};
    RetryPolicy retry;
    std::optional<unsigned> rng_seed; // fixed jitter stream for tests

    /// base_url from REFINE_BASE_URL (default api.openai.com/v1), key from
    /// REFINE_API_KEY falling back to OPENAI_API_KEY.
    static HttpConfig from_env();
};

/// Request body as sent on the wire: {model, messages, temperature}.
/// kind_tag is deliberately absent.
std::string to_wire(const ChatRequest& request);

/// Strict inverse of to_wire; throws MalformedResponse on any shape error.
ChatRequest chat_request_from_wire(const std::string& body);

/// Parses a chat-completion response body: choices[0].message.content plus
/// the optional usage object. Unknown usage components stay unknown.
ChatResponse parse_chat_response(const std::string& body);

/// Client for OpenAI-compatible chat-completion servers. Each complete()
/// opens a fresh connection and sends a single POST; 429 and 5xx are
/// retried per the policy, 401/403 map to AuthError without retry.
class HttpBackend final : public Backend {
public:
    explicit HttpBackend(HttpConfig config);

    ChatResponse complete(const ChatRequest& request) override;

private:
    std::chrono::milliseconds jittered_delay(int retry);

    HttpConfig config_;
    std::string host_;        // scheme://host[:port]
    std::string path_prefix_; // e.g. "/v1"
    std::mt19937 rng_;
    std::mutex rng_mutex_;
};

} // namespace refine
