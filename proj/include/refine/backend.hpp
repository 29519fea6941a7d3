#pragma once

#include "refine/domain.hpp"

#include <chrono>
#include <string>
#include <vector>

namespace refine {

struct ChatMessage {
    std::string role; // "user", "system" or "assistant"
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// One chat-completion request. kind_tag is local metadata used for
/// accounting and scripted routing; it is never transmitted.
struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::optional<PromptKind> kind_tag;
};

/// Throws std::invalid_argument on empty messages, empty content or a
/// temperature outside [0, 2].
void validate(const ChatRequest& request);

struct ChatResponse {
    std::string content; // assistant text, whitespace preserved as received
    TokenUsage usage;
    std::string model;
    std::chrono::milliseconds latency{0};
};

struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TransportError : BackendError {
    using BackendError::BackendError;
};

struct ServerError : BackendError {
    int status = 0;
    ServerError(int status_, const std::string& message)
        : BackendError(message), status(status_) {}
};

struct RateLimited : BackendError {
    using BackendError::BackendError;
};

struct AuthError : BackendError {
    using BackendError::BackendError;
};

struct MalformedResponse : BackendError {
    using BackendError::BackendError;
};

struct ScriptExhausted : BackendError {
    using BackendError::BackendError;
};

/// Uniform chat-completion access. Implementations must be stateless
/// across calls (no server-side conversation is ever built up) and must
/// tolerate concurrent complete() calls from distinct sessions.
class Backend {
public:
    virtual ~Backend() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

} // namespace refine
