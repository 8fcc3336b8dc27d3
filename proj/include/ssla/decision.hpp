#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ssla/expression.hpp"
#include "ssla/translation.hpp"

namespace ssla {

enum class Satisfaction { Satisfied, Unsatisfied };
enum class Overall { Accept, Counter, Reject };

std::string_view overall_name(Overall o) noexcept;

struct DecisionPolicy {
    /// The deciding party only accepts terms stated in the Technique
    /// dimension. A requirement that the KB can still concretize counts as
    /// Unsatisfied and is answered with a counterproposal instead.
    bool require_technique = false;
};

struct CounterProposal {
    /// Each entry is `requirement:technique` (with the translated function in
    /// between when the requirement sits above the Function dimension), or a
    /// requirement echoed verbatim when it cannot be made more concrete.
    ExpressionSet entries{ExpressionRole::SslaEntry};
    std::vector<SecurityExpression> unsatisfiable;
};

struct Verdict {
    std::vector<std::pair<SecurityExpression, Satisfaction>> per_requirement;
    Overall overall = Overall::Accept;
    /// Set for Counter (entries to propose) and Reject (unsatisfiable list).
    std::optional<CounterProposal> counter;
};

/// Checks one requirement against a capability list.
///
/// Technique requirements need an exact operative match. Anything else is
/// translated to the Function dimension and every resulting entry must be
/// covered by the capabilities translated to Function (reverse lookup for
/// techniques, identity for functions). Capabilities the KB does not know
/// cover nothing. Throws UnknownOidError for an unknown requirement.
Satisfaction decide_one(const Translator& kb, const SecurityExpression& req, const ExpressionSet& caps,
                        DecisionPolicy policy = {});

/// decide_one over every requirement. `caps` is the deciding party's own
/// capability list; `peer_caps` only steers technique preference when a
/// counterproposal is built. Accept iff all requirements are Satisfied;
/// otherwise Counter when a counterproposal covers every requirement, else
/// Reject.
Verdict decide_set(const Translator& kb, const ExpressionSet& reqs, const ExpressionSet& caps,
                   DecisionPolicy policy = {}, const ExpressionSet& peer_caps = ExpressionSet{});

/// Concretizes each requirement into techniques the builder can provide.
/// Per translated function one technique is chosen: first from KB suggestions
/// shared by both parties, then from suggestions only the builder has; ties go
/// to the lexicographically smallest canonical Oid.
CounterProposal build_counterproposal(const Translator& kb, const ExpressionSet& reqs,
                                      const ExpressionSet& peer_caps, const ExpressionSet& own_caps);

}  // namespace ssla
