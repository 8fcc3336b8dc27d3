#pragma once

#include <functional>
#include <memory>

#include "ssla/decision.hpp"
#include "ssla/protocol.hpp"

namespace ssla {

/// Service-provider side: runs decide_set on each proposal against its own
/// capabilities, counters when it can concretize, cancels when it cannot.
class ResponderStrategy final : public Strategy {
public:
    ResponderStrategy(std::shared_ptr<const Translator> kb, ExpressionSet own_caps, DecisionPolicy policy = {});

    Decision on_proposal(const SslaProposal& proposal, const NegotiationState& state) override;

private:
    std::shared_ptr<const Translator> kb_;
    ExpressionSet caps_;
    DecisionPolicy policy_;
};

/// User side: accepts a proposal only if its terms still cover the user's
/// original requirements, otherwise cancels. Never weakens.
class InitiatorStrategy final : public Strategy {
public:
    InitiatorStrategy(std::shared_ptr<const Translator> kb, ExpressionSet original_requirements);

    Decision on_proposal(const SslaProposal& proposal, const NegotiationState& state) override;

private:
    std::shared_ptr<const Translator> kb_;
    ExpressionSet original_;
};

class FunctionStrategy final : public Strategy {
public:
    using Fn = std::function<Decision(const SslaProposal&, const NegotiationState&)>;
    explicit FunctionStrategy(Fn fn) : fn_(std::move(fn)) {}

    Decision on_proposal(const SslaProposal& proposal, const NegotiationState& state) override {
        return fn_(proposal, state);
    }

private:
    Fn fn_;
};

}  // namespace ssla
