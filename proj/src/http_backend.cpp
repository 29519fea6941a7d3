#include "refine/http_backend.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#ifdef REFINE_HTTPS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
#include "json.hpp"

namespace refine {

namespace {

constexpr const char* kCompletionsPath = "/chat/completions";

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return value ? std::string(value) : fallback;
}

std::optional<std::int64_t> opt_int_field(const nlohmann::json& obj, const char* key) {
    if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
    if (!obj[key].is_number_integer()) {
        throw MalformedResponse(std::string("usage field \"") + key +
                                "\" is not an integer");
    }
    return obj[key].get<std::int64_t>();
}

} // namespace

std::chrono::milliseconds RetryPolicy::cap_for(int retry) const {
    if (retry < 1) return std::chrono::milliseconds{0};
    const double cap = static_cast<double>(base_delay.count()) *
                       std::pow(factor, static_cast<double>(retry - 1));
    return std::chrono::milliseconds{static_cast<std::int64_t>(cap)};
}

HttpConfig HttpConfig::from_env() {
    HttpConfig config;
    config.base_url = env_or("REFINE_BASE_URL", "https://api.openai.com/v1");
    config.api_key = env_or("REFINE_API_KEY", env_or("OPENAI_API_KEY", ""));
    return config;
}

std::string to_wire(const ChatRequest& request) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    const nlohmann::json body = {
        {"model", request.model},
        {"messages", std::move(messages)},
        {"temperature", request.temperature},
    };
    return body.dump();
}

ChatRequest chat_request_from_wire(const std::string& body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedResponse(std::string("request body is not JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("model") || !doc["model"].is_string() ||
        !doc.contains("messages") || !doc["messages"].is_array() ||
        !doc.contains("temperature") || !doc["temperature"].is_number()) {
        throw MalformedResponse("request body must carry model, messages and temperature");
    }
    ChatRequest request;
    request.model = doc["model"].get<std::string>();
    request.temperature = doc["temperature"].get<double>();
    for (const auto& m : doc["messages"]) {
        if (!m.is_object() || !m.contains("role") || !m["role"].is_string() ||
            !m.contains("content") || !m["content"].is_string()) {
            throw MalformedResponse("each message must carry string role and content");
        }
        request.messages.push_back(
            ChatMessage{m["role"].get<std::string>(), m["content"].get<std::string>()});
    }
    validate(request);
    return request;
}

ChatResponse parse_chat_response(const std::string& body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedResponse(std::string("response body is not JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() ||
        doc["choices"].empty()) {
        throw MalformedResponse("response body has no choices");
    }
    const auto& choice = doc["choices"][0];
    if (!choice.is_object() || !choice.contains("message") ||
        !choice["message"].is_object() || !choice["message"].contains("content") ||
        !choice["message"]["content"].is_string()) {
        throw MalformedResponse("first choice has no message content");
    }

    ChatResponse response;
    response.content = choice["message"]["content"].get<std::string>();
    if (doc.contains("model") && doc["model"].is_string()) {
        response.model = doc["model"].get<std::string>();
    }
    if (doc.contains("usage") && doc["usage"].is_object()) {
        const auto& usage = doc["usage"];
        response.usage.prompt_tokens = opt_int_field(usage, "prompt_tokens");
        response.usage.completion_tokens = opt_int_field(usage, "completion_tokens");
        response.usage.total_tokens = opt_int_field(usage, "total_tokens");
        if (!response.usage.total_tokens && response.usage.prompt_tokens &&
            response.usage.completion_tokens) {
            response.usage.total_tokens =
                *response.usage.prompt_tokens + *response.usage.completion_tokens;
        }
    }
    return response;
}

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) {
        throw std::invalid_argument("HttpBackend needs a base URL");
    }
    const auto scheme_end = config_.base_url.find("://");
    const auto path_start = config_.base_url.find(
        '/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) {
        host_ = config_.base_url;
    } else {
        host_ = config_.base_url.substr(0, path_start);
        path_prefix_ = config_.base_url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') {
            path_prefix_.pop_back();
        }
    }
    rng_.seed(config_.rng_seed ? *config_.rng_seed : std::random_device{}());
}

std::chrono::milliseconds HttpBackend::jittered_delay(int retry) {
    const auto cap = config_.retry.cap_for(retry);
    if (!config_.retry.full_jitter) return cap;
    std::scoped_lock lock(rng_mutex_);
    std::uniform_int_distribution<std::int64_t> dist(0, cap.count());
    return std::chrono::milliseconds{dist(rng_)};
}

ChatResponse HttpBackend::complete(const ChatRequest& request) {
    validate(request);
    const std::string body = to_wire(request);
    const std::string path = path_prefix_ + kCompletionsPath;

    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    const auto started = std::chrono::steady_clock::now();
    const int max_attempts = std::max(1, config_.retry.max_attempts);
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        httplib::Client client(host_);
        client.set_connection_timeout(config_.request_timeout);
        client.set_read_timeout(config_.request_timeout);
        client.set_write_timeout(config_.request_timeout);

        auto result = client.Post(path, headers, body, "application/json");
        if (!result) {
            throw TransportError("transport failure: " + httplib::to_string(result.error()));
        }

        const int status = result->status;
        if (status == 200) {
            ChatResponse response = parse_chat_response(result->body);
            if (response.model.empty()) response.model = request.model;
            response.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - started);
            return response;
        }
        if (status == 401 || status == 403) {
            throw AuthError("authentication rejected (HTTP " + std::to_string(status) + ")");
        }
        const bool retryable = status == 429 || (status >= 500 && status < 600);
        if (!retryable) {
            throw ServerError(status, "unexpected HTTP status " + std::to_string(status));
        }
        if (attempt == max_attempts) {
            if (status == 429) {
                throw RateLimited("rate limited after " + std::to_string(attempt) +
                                  " attempts");
            }
            throw ServerError(status, "server error HTTP " + std::to_string(status) +
                                          " after " + std::to_string(attempt) + " attempts");
        }
        std::this_thread::sleep_for(jittered_delay(attempt));
    }
    throw TransportError("retry loop exited unexpectedly");
}

} // namespace refine
