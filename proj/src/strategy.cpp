#include "ssla/strategy.hpp"

#include <stdexcept>

namespace ssla {

namespace {

std::string join(const std::vector<SecurityExpression>& items) {
    std::string out;
    for (const auto& e : items) {
        if (!out.empty()) out += ", ";
        out += e.str();
    }
    return out;
}

}  // namespace

ResponderStrategy::ResponderStrategy(std::shared_ptr<const Translator> kb, ExpressionSet own_caps,
                                     DecisionPolicy policy)
    : kb_(std::move(kb)), caps_(std::move(own_caps)), policy_(policy) {
    if (!kb_) throw std::invalid_argument("strategy needs a knowledge base");
}

Decision ResponderStrategy::on_proposal(const SslaProposal& proposal, const NegotiationState&) {
    auto verdict = decide_set(*kb_, proposal.requirements, caps_, policy_, proposal.capabilities);
    switch (verdict.overall) {
        case Overall::Accept:
            return Decision::accept();
        case Overall::Counter:
            return Decision::counter(verdict.counter->entries, caps_);
        case Overall::Reject:
            break;
    }
    return Decision::cancel("unsatisfiable: " + join(verdict.counter->unsatisfiable));
}

InitiatorStrategy::InitiatorStrategy(std::shared_ptr<const Translator> kb, ExpressionSet original_requirements)
    : kb_(std::move(kb)), original_(std::move(original_requirements)) {
    if (!kb_) throw std::invalid_argument("strategy needs a knowledge base");
}

Decision InitiatorStrategy::on_proposal(const SslaProposal& proposal, const NegotiationState&) {
    ExpressionSet offered(ExpressionRole::Capability);
    for (const auto& e : proposal.requirements) offered.insert(e);
    auto verdict = decide_set(*kb_, original_, offered);
    if (verdict.overall == Overall::Accept) return Decision::accept();

    std::vector<SecurityExpression> missing;
    for (const auto& [req, sat] : verdict.per_requirement) {
        if (sat == Satisfaction::Unsatisfied) missing.push_back(req);
    }
    return Decision::cancel("offer does not cover: " + join(missing));
}

}  // namespace ssla
