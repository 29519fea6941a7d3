#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace refine {

/// Strips leading/trailing ASCII whitespace.
std::string trimmed(std::string_view text);

/// Every outbound model call carries exactly one of these tags.
enum class PromptKind {
    InitialAnswer,
    DefectAnalysis,
    GuidedOptimization,
    BlindOptimization,
    Vote,
};

enum class RefinementMode {
    Full,     // defect analysis + guided optimization + vote, every round
    Blind,    // optimization without a defect analysis; vote kept
    Reckless, // defect analysis + guided optimization; no vote, never stops early
};

enum class StopReason {
    MaxIterations,
    VoteRejected,
    VoteTie,
    BackendError,
};

std::string_view to_string(PromptKind kind);
std::string_view to_string(RefinementMode mode);
std::string_view to_string(StopReason reason);
std::optional<PromptKind> prompt_kind_from_string(std::string_view name);
std::optional<RefinementMode> mode_from_string(std::string_view name);
std::optional<StopReason> stop_reason_from_string(std::string_view name);

/// The user's question plus the iteration budget.
/// Text must be canonical: non-empty and free of surrounding whitespace.
struct Query {
    std::string id;
    std::string text;
    int max_iterations = 0;

    Query(std::string id, std::string text, int max_iterations);

    friend bool operator==(const Query&, const Query&) = default;
};

/// A model response with its provenance round (0 = initial answer,
/// k >= 1 = produced by optimization round k).
struct Answer {
    std::string text;
    int round = 0;

    Answer() = default;
    Answer(std::string text, int round);

    friend bool operator==(const Answer&, const Answer&) = default;
};

/// One-sentence flaw analysis of the current incumbent answer.
struct DefectReport {
    std::string text;
    int round = 1;

    DefectReport(std::string text, int round);

    friend bool operator==(const DefectReport&, const DefectReport&) = default;
};

/// Comparison verdict: "1" = previous answer, "2" = candidate, "0" = tie.
enum class Verdict { Previous, Candidate, Tie };

struct Vote {
    Verdict verdict = Verdict::Tie;

    /// The wire label the verdict corresponds to ("1", "2" or "0").
    std::string_view label() const;

    friend bool operator==(const Vote&, const Vote&) = default;
};

/// Token counts for one call. A backend that does not report a component
/// leaves it unset; unknown values are never substituted with zero.
struct TokenUsage {
    std::optional<std::int64_t> prompt_tokens;
    std::optional<std::int64_t> completion_tokens;
    std::optional<std::int64_t> total_tokens;

    static TokenUsage of(std::int64_t prompt, std::int64_t completion);
    static TokenUsage unknown();

    /// Component-wise sum; an unknown addend makes the component unknown.
    TokenUsage& operator+=(const TokenUsage& other);
    friend TokenUsage operator+(TokenUsage lhs, const TokenUsage& rhs);

    friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

struct LedgerEntry {
    PromptKind kind = PromptKind::InitialAnswer;
    int round = 0;
    TokenUsage usage;

    friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

/// Per-call token accounting for a session.
struct CostLedger {
    std::vector<LedgerEntry> entries;

    void add(PromptKind kind, int round, TokenUsage usage);

    std::size_t calls_for(PromptKind kind) const;
    std::size_t total_calls() const;
    TokenUsage total_for(PromptKind kind) const;
    TokenUsage grand_total() const;
    /// Entries whose usage has at least one unknown component.
    std::size_t entries_with_unknown_usage() const;

    friend bool operator==(const CostLedger&, const CostLedger&) = default;
};

/// Audit record of one optimization round.
/// Invariants: defect absent iff mode is Blind, vote absent iff mode is
/// Reckless, accepted = (mode is Reckless) or (vote = Candidate).
struct IterationRecord {
    int round = 1;
    std::optional<DefectReport> defect;
    Answer candidate;
    std::optional<Vote> vote;
    bool accepted = false;
    TokenUsage tokens; // all calls of this round combined

    friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

/// Full per-session audit trail.
struct Transcript {
    Query query;
    RefinementMode mode = RefinementMode::Full;
    Answer initial;
    std::vector<IterationRecord> records;
    Answer final_answer;
    StopReason stop_reason = StopReason::MaxIterations;
    CostLedger ledger;

    friend bool operator==(const Transcript&, const Transcript&) = default;
};

} // namespace refine
