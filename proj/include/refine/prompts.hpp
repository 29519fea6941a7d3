#pragma once

#include "refine/domain.hpp"

#include <array>
#include <string>
#include <string_view>

namespace refine {

/// A fully rendered prompt, tagged with the call kind it belongs to.
struct PromptText {
    PromptKind kind = PromptKind::InitialAnswer;
    std::string text;

    friend bool operator==(const PromptText&, const PromptText&) = default;
};

struct InvalidAnswer : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct MissingDefect : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct OrderingError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Literal template skeletons. Rendering concatenates these segments with
// the session variables in a single pass; nothing inside the variables is
// ever re-expanded. The same segments drive classify(), so renderer and
// classifier cannot drift apart.
namespace templates {

// Please list the defects of answer {a} to the question {q}. ...
inline constexpr std::array<std::string_view, 3> defect_segments = {
    "Please list the defects of answer ",
    " to the question ",
    ". List the defects in one sentence instead of a list with line breaks!",
};

// The answer {a} to the question {q} is not optimal because that {d}. ...
inline constexpr std::array<std::string_view, 4> guided_segments = {
    "The answer ",
    " to the question ",
    " is not optimal because that ",
    ". Please refine the answer providing a better one regarding the aforementioned "
    "flaw. You should provide nothing but the answer.",
};

// The answer {a} to the question {q} may be suboptimal. ...
inline constexpr std::array<std::string_view, 3> blind_segments = {
    "The answer ",
    " to the question ",
    " may be suboptimal. Please refine the answer providing a better one. You should "
    "provide nothing but the answer.",
};

// The question is {q}, to which there are two optimal answers, one is {a},
// the other one is {a*}. ...
inline constexpr std::array<std::string_view, 4> vote_segments = {
    "The question is ",
    ", to which there are two optimal answers, one is ",
    ", the other one is ",
    ". Please answer either \"1\" or \"2\" if you think one of them is better, or "
    "\"0\" if you think they're equally good. Do not reply anything else than a "
    "number!",
};

/// Template with placeholder markers restored, for display (`refine templates`).
std::string display(PromptKind kind);

} // namespace templates

/// The initial call sends the bare question, no preamble.
PromptText render_initial(const Query& q);

PromptText render_defect(const Query& q, const Answer& a);

PromptText render_guided_optimization(const Query& q, const Answer& a,
                                      const DefectReport& d);

PromptText render_blind_optimization(const Query& q, const Answer& a);

/// Ordering is fixed: label "1" always denotes the previous answer,
/// label "2" the new candidate.
PromptText render_vote(const Query& q, const Answer& a_prev, const Answer& a_new);

/// Maps prompt text back to its kind by matching the template skeletons;
/// text matching no skeleton is InitialAnswer. Total function.
PromptKind classify(std::string_view text);

} // namespace refine
