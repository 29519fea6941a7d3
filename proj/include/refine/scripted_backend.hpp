#pragma once

#include "refine/backend.hpp"

#include <filesystem>
#include <map>
#include <mutex>

namespace refine {

/// One canned reply. Token counts are optional: a missing component is
/// recorded as unknown usage, mirroring backends that omit it.
struct ScriptedReply {
    std::string content;
    std::optional<std::int64_t> prompt_tokens;
    std::optional<std::int64_t> completion_tokens;

    TokenUsage usage() const;

    friend bool operator==(const ScriptedReply&, const ScriptedReply&) = default;
};

/// Deterministic reply queues, one per prompt kind.
struct BackendScript {
    std::map<PromptKind, std::vector<ScriptedReply>> queues;

    static BackendScript from_json_text(const std::string& text);
    static BackendScript from_file(const std::filesystem::path& path);
};

/// Offline oracle backend: pops the scripted queue matching each request's
/// kind. Consuming past the end of a queue throws ScriptExhausted, never a
/// silent default. Records every request it serves so tests can inspect
/// exact outbound traffic.
class ScriptedBackend final : public Backend {
public:
    explicit ScriptedBackend(BackendScript script);

    ChatResponse complete(const ChatRequest& request) override;

    std::vector<ChatRequest> recorded_requests() const;
    std::size_t call_count() const;

private:
    BackendScript script_;
    std::map<PromptKind, std::size_t> next_;
    std::vector<ChatRequest> recorded_;
    mutable std::mutex mutex_;
};

} // namespace refine
