#include "refine/prompts.hpp"

#include <span>

namespace refine {

namespace {

// seg0 v0 seg1 v1 ... segN-1, single left-to-right pass.
std::string join(std::span<const std::string_view> segments,
                 std::span<const std::string_view> values) {
    std::string out;
    std::size_t size = 0;
    for (auto s : segments) size += s.size();
    for (auto v : values) size += v.size();
    out.reserve(size);
    for (std::size_t i = 0; i < segments.size(); ++i) {
        out += segments[i];
        if (i < values.size()) out += values[i];
    }
    return out;
}

// text must start with the first segment, end with the last, and contain
// the middle segments in order in between.
bool matches_skeleton(std::string_view text, std::span<const std::string_view> segments) {
    if (segments.empty()) return false;
    const auto& first = segments.front();
    const auto& last = segments.back();
    if (text.size() < first.size() + last.size()) return false;
    if (!text.starts_with(first) || !text.ends_with(last)) return false;
    std::size_t pos = first.size();
    const std::size_t tail = text.size() - last.size();
    for (std::size_t i = 1; i + 1 < segments.size(); ++i) {
        const std::size_t found = text.find(segments[i], pos);
        if (found == std::string_view::npos || found + segments[i].size() > tail) {
            return false;
        }
        pos = found + segments[i].size();
    }
    return pos <= tail;
}

} // namespace

namespace templates {

std::string display(PromptKind kind) {
    switch (kind) {
    case PromptKind::InitialAnswer:
        return "{q}";
    case PromptKind::DefectAnalysis:
        return join(defect_segments, std::array<std::string_view, 2>{"{a}", "{q}"});
    case PromptKind::GuidedOptimization:
        return join(guided_segments,
                    std::array<std::string_view, 3>{"{a}", "{q}", "{d}"});
    case PromptKind::BlindOptimization:
        return join(blind_segments, std::array<std::string_view, 2>{"{a}", "{q}"});
    case PromptKind::Vote:
        return join(vote_segments,
                    std::array<std::string_view, 3>{"{q}", "{a}", "{a*}"});
    }
    return {};
}

} // namespace templates

PromptText render_initial(const Query& q) {
    return PromptText{PromptKind::InitialAnswer, q.text};
}

PromptText render_defect(const Query& q, const Answer& a) {
    if (a.text.empty()) {
        throw InvalidAnswer("defect analysis requires a non-empty answer");
    }
    return PromptText{
        PromptKind::DefectAnalysis,
        join(templates::defect_segments,
             std::array<std::string_view, 2>{a.text, q.text}),
    };
}

PromptText render_guided_optimization(const Query& q, const Answer& a,
                                      const DefectReport& d) {
    if (a.text.empty()) {
        throw InvalidAnswer("guided optimization requires a non-empty answer");
    }
    if (d.text.empty()) {
        throw MissingDefect("guided optimization requires a defect report");
    }
    return PromptText{
        PromptKind::GuidedOptimization,
        join(templates::guided_segments,
             std::array<std::string_view, 3>{a.text, q.text, d.text}),
    };
}

PromptText render_blind_optimization(const Query& q, const Answer& a) {
    if (a.text.empty()) {
        throw InvalidAnswer("blind optimization requires a non-empty answer");
    }
    return PromptText{
        PromptKind::BlindOptimization,
        join(templates::blind_segments,
             std::array<std::string_view, 2>{a.text, q.text}),
    };
}

PromptText render_vote(const Query& q, const Answer& a_prev, const Answer& a_new) {
    if (a_prev.text.empty() || a_new.text.empty()) {
        throw InvalidAnswer("voting requires two non-empty answers");
    }
    if (a_prev.round >= a_new.round) {
        throw OrderingError("vote requires a_prev.round < a_new.round");
    }
    return PromptText{
        PromptKind::Vote,
        join(templates::vote_segments,
             std::array<std::string_view, 3>{q.text, a_prev.text, a_new.text}),
    };
}

PromptKind classify(std::string_view text) {
    // Vote and defect skeletons have unique prefixes; guided and blind share
    // a prefix but end differently, so at most one can match.
    if (matches_skeleton(text, templates::vote_segments)) return PromptKind::Vote;
    if (matches_skeleton(text, templates::defect_segments)) {
        return PromptKind::DefectAnalysis;
    }
    if (matches_skeleton(text, templates::guided_segments)) {
        return PromptKind::GuidedOptimization;
    }
    if (matches_skeleton(text, templates::blind_segments)) {
        return PromptKind::BlindOptimization;
    }
    return PromptKind::InitialAnswer;
}

} // namespace refine
