#include "refine/backend.hpp"

namespace refine {

void validate(const ChatRequest& request) {
    if (request.messages.empty()) {
        throw std::invalid_argument("chat request needs at least one message");
    }
    for (const auto& m : request.messages) {
        if (m.content.empty()) {
            throw std::invalid_argument("chat message content must be non-empty");
        }
        if (m.role != "user" && m.role != "system" && m.role != "assistant") {
            throw std::invalid_argument("chat message role must be user, system or assistant");
        }
    }
    if (request.temperature < 0.0 || request.temperature > 2.0) {
        throw std::invalid_argument("temperature must be within [0, 2]");
    }
}

} // namespace refine
