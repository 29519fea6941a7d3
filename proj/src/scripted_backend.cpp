#include "refine/scripted_backend.hpp"

#include "refine/prompts.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace refine {

TokenUsage ScriptedReply::usage() const {
    TokenUsage u;
    u.prompt_tokens = prompt_tokens;
    u.completion_tokens = completion_tokens;
    if (prompt_tokens && completion_tokens) {
        u.total_tokens = *prompt_tokens + *completion_tokens;
    }
    return u;
}

BackendScript BackendScript::from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("script is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw std::runtime_error("script must be a JSON object of kind -> replies");
    }
    BackendScript script;
    for (const auto& [key, value] : doc.items()) {
        const auto kind = prompt_kind_from_string(key);
        if (!kind) {
            throw std::runtime_error("script has unknown kind \"" + key + "\"");
        }
        if (!value.is_array()) {
            throw std::runtime_error("script entry \"" + key + "\" must be an array");
        }
        auto& queue = script.queues[*kind];
        for (const auto& item : value) {
            ScriptedReply reply;
            if (item.is_string()) {
                reply.content = item.get<std::string>();
            } else if (item.is_object()) {
                if (!item.contains("content") || !item["content"].is_string()) {
                    throw std::runtime_error("script reply in \"" + key +
                                             "\" needs a string \"content\"");
                }
                reply.content = item["content"].get<std::string>();
                if (item.contains("prompt_tokens")) {
                    reply.prompt_tokens = item["prompt_tokens"].get<std::int64_t>();
                }
                if (item.contains("completion_tokens")) {
                    reply.completion_tokens = item["completion_tokens"].get<std::int64_t>();
                }
            } else {
                throw std::runtime_error("script reply in \"" + key +
                                         "\" must be an object or string");
            }
            queue.push_back(std::move(reply));
        }
    }
    return script;
}

BackendScript BackendScript::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open script file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

ScriptedBackend::ScriptedBackend(BackendScript script) : script_(std::move(script)) {}

ChatResponse ScriptedBackend::complete(const ChatRequest& request) {
    validate(request);
    const PromptKind kind =
        request.kind_tag ? *request.kind_tag : classify(request.messages.back().content);

    std::scoped_lock lock(mutex_);
    recorded_.push_back(request);

    const auto it = script_.queues.find(kind);
    auto& cursor = next_[kind];
    if (it == script_.queues.end() || cursor >= it->second.size()) {
        throw ScriptExhausted(std::string("script exhausted for kind \"") +
                              std::string(to_string(kind)) + "\"");
    }
    const ScriptedReply& reply = it->second[cursor++];

    ChatResponse response;
    response.content = reply.content;
    response.usage = reply.usage();
    response.model = request.model;
    response.latency = std::chrono::milliseconds{0};
    return response;
}

std::vector<ChatRequest> ScriptedBackend::recorded_requests() const {
    std::scoped_lock lock(mutex_);
    return recorded_;
}

std::size_t ScriptedBackend::call_count() const {
    std::scoped_lock lock(mutex_);
    return recorded_.size();
}

} // namespace refine
