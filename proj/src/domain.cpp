#include "refine/domain.hpp"

namespace refine {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

} // namespace

std::string trimmed(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && is_space(text[begin])) ++begin;
    while (end > begin && is_space(text[end - 1])) --end;
    return std::string(text.substr(begin, end - begin));
}

std::string_view to_string(PromptKind kind) {
    switch (kind) {
    case PromptKind::InitialAnswer: return "initial";
    case PromptKind::DefectAnalysis: return "defect";
    case PromptKind::GuidedOptimization: return "optimize";
    case PromptKind::BlindOptimization: return "blind_optimize";
    case PromptKind::Vote: return "vote";
    }
    return "initial";
}

std::string_view to_string(RefinementMode mode) {
    switch (mode) {
    case RefinementMode::Full: return "full";
    case RefinementMode::Blind: return "blind";
    case RefinementMode::Reckless: return "reckless";
    }
    return "full";
}

std::string_view to_string(StopReason reason) {
    switch (reason) {
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::VoteRejected: return "vote_rejected";
    case StopReason::VoteTie: return "vote_tie";
    case StopReason::BackendError: return "backend_error";
    }
    return "max_iterations";
}

std::optional<PromptKind> prompt_kind_from_string(std::string_view name) {
    if (name == "initial") return PromptKind::InitialAnswer;
    if (name == "defect") return PromptKind::DefectAnalysis;
    if (name == "optimize") return PromptKind::GuidedOptimization;
    if (name == "blind_optimize") return PromptKind::BlindOptimization;
    if (name == "vote") return PromptKind::Vote;
    return std::nullopt;
}

std::optional<RefinementMode> mode_from_string(std::string_view name) {
    if (name == "full") return RefinementMode::Full;
    if (name == "blind") return RefinementMode::Blind;
    if (name == "reckless") return RefinementMode::Reckless;
    return std::nullopt;
}

std::optional<StopReason> stop_reason_from_string(std::string_view name) {
    if (name == "max_iterations") return StopReason::MaxIterations;
    if (name == "vote_rejected") return StopReason::VoteRejected;
    if (name == "vote_tie") return StopReason::VoteTie;
    if (name == "backend_error") return StopReason::BackendError;
    return std::nullopt;
}

Query::Query(std::string id_, std::string text_, int max_iterations_)
    : id(std::move(id_)), text(std::move(text_)), max_iterations(max_iterations_) {
    if (text.empty() || text != trimmed(text)) {
        throw std::invalid_argument(
            "Query text must be non-empty with no surrounding whitespace");
    }
    if (max_iterations < 0) {
        throw std::invalid_argument("Query max_iterations must be >= 0");
    }
}

Answer::Answer(std::string text_, int round_) : text(std::move(text_)), round(round_) {
    if (round < 0) throw std::invalid_argument("Answer round must be >= 0");
}

DefectReport::DefectReport(std::string text_, int round_)
    : text(std::move(text_)), round(round_) {
    if (text.empty()) {
        throw std::invalid_argument("DefectReport text must be non-empty");
    }
    if (round < 1) throw std::invalid_argument("DefectReport round must be >= 1");
}

std::string_view Vote::label() const {
    switch (verdict) {
    case Verdict::Previous: return "1";
    case Verdict::Candidate: return "2";
    case Verdict::Tie: return "0";
    }
    return "0";
}

TokenUsage TokenUsage::of(std::int64_t prompt, std::int64_t completion) {
    return TokenUsage{prompt, completion, prompt + completion};
}

TokenUsage TokenUsage::unknown() {
    return TokenUsage{};
}

namespace {

std::optional<std::int64_t> add_opt(const std::optional<std::int64_t>& a,
                                    const std::optional<std::int64_t>& b) {
    if (a && b) return *a + *b;
    return std::nullopt;
}

} // namespace

TokenUsage& TokenUsage::operator+=(const TokenUsage& other) {
    prompt_tokens = add_opt(prompt_tokens, other.prompt_tokens);
    completion_tokens = add_opt(completion_tokens, other.completion_tokens);
    total_tokens = add_opt(total_tokens, other.total_tokens);
    return *this;
}

TokenUsage operator+(TokenUsage lhs, const TokenUsage& rhs) {
    lhs += rhs;
    return lhs;
}

void CostLedger::add(PromptKind kind, int round, TokenUsage usage) {
    entries.push_back(LedgerEntry{kind, round, usage});
}

std::size_t CostLedger::calls_for(PromptKind kind) const {
    std::size_t n = 0;
    for (const auto& e : entries) {
        if (e.kind == kind) ++n;
    }
    return n;
}

std::size_t CostLedger::total_calls() const {
    return entries.size();
}

TokenUsage CostLedger::total_for(PromptKind kind) const {
    TokenUsage sum = TokenUsage::of(0, 0);
    for (const auto& e : entries) {
        if (e.kind == kind) sum += e.usage;
    }
    return sum;
}

TokenUsage CostLedger::grand_total() const {
    TokenUsage sum = TokenUsage::of(0, 0);
    for (const auto& e : entries) sum += e.usage;
    return sum;
}

std::size_t CostLedger::entries_with_unknown_usage() const {
    std::size_t n = 0;
    for (const auto& e : entries) {
        if (!e.usage.prompt_tokens || !e.usage.completion_tokens || !e.usage.total_tokens) ++n;
    }
    return n;
}

} // namespace refine
