#include "refine/engine.hpp"

#include "refine/prompts.hpp"

#include <cctype>
#include <set>

namespace refine {

namespace {

bool alnum(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

Vote vote_from_label(char label) {
    switch (label) {
    case '1': return Vote{Verdict::Previous};
    case '2': return Vote{Verdict::Candidate};
    default: return Vote{Verdict::Tie};
    }
}

ChatResponse issue_call(Backend& backend, const PromptText& prompt, int round,
                        double temperature, const EngineOptions& options,
                        CostLedger& ledger) {
    ChatRequest request;
    request.model = options.model;
    request.messages = {ChatMessage{"user", prompt.text}};
    request.temperature = temperature;
    request.kind_tag = prompt.kind;

    ChatResponse response = backend.complete(request);
    ledger.add(prompt.kind, round, response.usage);
    if (options.observer) {
        options.observer(SessionEvent{round, prompt.kind, prompt.text, response.content});
    }
    return response;
}

} // namespace

Vote parse_vote(std::string_view raw) {
    const std::string strict = trimmed(raw);
    if (strict == "0" || strict == "1" || strict == "2") {
        return vote_from_label(strict[0]);
    }

    std::set<char> labels;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const char c = raw[i];
        if (c != '0' && c != '1' && c != '2') continue;
        const bool left_free = i == 0 || !alnum(raw[i - 1]);
        const bool right_free = i + 1 == raw.size() || !alnum(raw[i + 1]);
        if (left_free && right_free) labels.insert(c);
    }
    if (labels.size() == 1) return vote_from_label(*labels.begin());
    throw UnparseableVote("vote reply \"" + std::string(raw) + "\" names " +
                          (labels.empty() ? "no label" : "multiple labels"));
}

bool accept_rule(RefinementMode mode, const std::optional<Vote>& vote) {
    if (mode == RefinementMode::Reckless) {
        if (vote) throw std::logic_error("reckless rounds must not carry a vote");
        return true;
    }
    if (!vote) throw std::logic_error("vote required outside reckless mode");
    return vote->verdict == Verdict::Candidate;
}

StepResult step(const SessionState& state, Backend& backend,
                const EngineOptions& options, CostLedger& ledger) {
    if (state.round >= state.query.max_iterations) {
        throw std::logic_error("step called past the iteration budget");
    }
    const int round = state.round + 1;
    const Query& query = state.query;
    const std::size_t round_start = ledger.entries.size();

    std::optional<DefectReport> defect;
    if (state.mode != RefinementMode::Blind) {
        const auto reply = issue_call(backend, render_defect(query, state.incumbent),
                                      round, options.judging_temperature, options, ledger);
        const std::string text = trimmed(reply.content);
        if (text.empty()) {
            throw MalformedResponse("defect analysis returned empty text");
        }
        defect = DefectReport{text, round};
    }

    const PromptText optimization =
        defect ? render_guided_optimization(query, state.incumbent, *defect)
               : render_blind_optimization(query, state.incumbent);
    const auto candidate_reply = issue_call(backend, optimization, round,
                                            options.generation_temperature, options, ledger);
    const std::string candidate_text = trimmed(candidate_reply.content);
    if (candidate_text.empty()) {
        throw MalformedResponse("optimization returned an empty answer");
    }
    const Answer candidate{candidate_text, round};

    std::optional<Vote> vote;
    if (state.mode != RefinementMode::Reckless) {
        const auto vote_reply =
            issue_call(backend, render_vote(query, state.incumbent, candidate), round,
                       options.judging_temperature, options, ledger);
        vote = parse_vote(vote_reply.content);
    }

    const bool accepted = accept_rule(state.mode, vote);

    TokenUsage round_tokens = TokenUsage::of(0, 0);
    for (std::size_t i = round_start; i < ledger.entries.size(); ++i) {
        round_tokens += ledger.entries[i].usage;
    }

    return StepResult{
        SessionState{query, accepted ? candidate : state.incumbent, round, state.mode},
        IterationRecord{round, defect, candidate, vote, accepted, round_tokens},
    };
}

Transcript run_session(const Query& query, RefinementMode mode, Backend& backend,
                       const EngineOptions& options) {
    CostLedger ledger;
    std::vector<IterationRecord> records;
    StopReason stop = StopReason::MaxIterations;
    Answer initial{};
    Answer incumbent{};

    try {
        const PromptText prompt = render_initial(query);
        ChatRequest request;
        request.model = options.model;
        request.messages = {ChatMessage{"user", prompt.text}};
        request.temperature = options.generation_temperature;
        request.kind_tag = prompt.kind;

        const ChatResponse reply = backend.complete(request);
        ledger.add(PromptKind::InitialAnswer, 0, reply.usage);
        if (options.observer) {
            options.observer(SessionEvent{0, prompt.kind, prompt.text, reply.content});
        }
        const std::string text = trimmed(reply.content);
        if (text.empty()) {
            throw MalformedResponse("initial answer was empty");
        }
        initial = Answer{text, 0};
        incumbent = initial;

        SessionState state{query, incumbent, 0, mode};
        while (state.round < query.max_iterations) {
            const StepResult outcome = step(state, backend, options, ledger);
            records.push_back(outcome.record);
            state = outcome.state;
            incumbent = state.incumbent;
            if (!outcome.record.accepted) {
                stop = (outcome.record.vote &&
                        outcome.record.vote->verdict == Verdict::Tie)
                           ? StopReason::VoteTie
                           : StopReason::VoteRejected;
                break;
            }
        }
    } catch (const BackendError&) {
        stop = StopReason::BackendError;
    }

    return Transcript{query,     mode, initial, std::move(records),
                      incumbent, stop, std::move(ledger)};
}

} // namespace refine
