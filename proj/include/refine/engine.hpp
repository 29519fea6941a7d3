#pragma once

#include "refine/backend.hpp"
#include "refine/domain.hpp"

#include <functional>

namespace refine {

/// Vote reply that names zero labels or more than one distinct label.
/// Aborts the session conservatively: the incumbent is returned.
struct UnparseableVote : BackendError {
    using BackendError::BackendError;
};

/// Strict pass: trimmed reply is exactly "0", "1" or "2". Lenient pass:
/// exactly one distinct label occurs as a standalone token (delimited by
/// non-alphanumerics or string edges). Anything else throws.
Vote parse_vote(std::string_view raw);

/// Greedy gate: Reckless always accepts; otherwise the candidate must have
/// won the vote. Vote must be present iff the mode is not Reckless.
bool accept_rule(RefinementMode mode, const std::optional<Vote>& vote);

/// Everything a session retains between rounds. The incumbent is the only
/// answer carried forward; rejected candidates and past defects are never
/// fed into later prompts.
struct SessionState {
    Query query;
    Answer incumbent;
    int round = 0;
    RefinementMode mode = RefinementMode::Full;
};

struct SessionEvent {
    int round = 0;
    PromptKind kind = PromptKind::InitialAnswer;
    std::string prompt;
    std::string response;
};

struct EngineOptions {
    std::string model = "gpt-3.5-turbo";
    double generation_temperature = 0.7; // initial answer and both optimization kinds
    double judging_temperature = 0.0;    // defect analysis and vote
    std::function<void(const SessionEvent&)> observer; // optional loop tap
};

struct StepResult {
    SessionState state;
    IterationRecord record;
};

/// Runs one optimization round. Each call's usage is appended to the
/// ledger as it completes, so aborted rounds still account their spend.
/// Prompt construction uses only the query, the incumbent and this round's
/// fresh defect.
StepResult step(const SessionState& state, Backend& backend,
                const EngineOptions& options, CostLedger& ledger);

/// The full loop: initial answer, then up to max_iterations rounds with
/// greedy acceptance. A losing or tied vote stops the session with the
/// incumbent; any backend failure stops it with stop_reason=BackendError
/// and the best answer known so far. Never throws for backend trouble.
Transcript run_session(const Query& query, RefinementMode mode, Backend& backend,
                       const EngineOptions& options = {});

} // namespace refine
