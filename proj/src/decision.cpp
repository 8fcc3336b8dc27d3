#include "ssla/decision.hpp"

#include <algorithm>
#include <set>

#include "ssla/error.hpp"

namespace ssla {

namespace {

/// Operative Oids of the capabilities once lifted or lowered to Function.
std::set<Oid> covered_functions(const Translator& kb, const ExpressionSet& caps) {
    std::set<Oid> covered;
    for (const auto& cap : caps) {
        try {
            for (const auto& out : kb.translate(cap, Dimension::Function).output) covered.insert(out.operative());
        } catch (const UnknownOidError&) {
            // a capability from someone else's vocabulary covers nothing here
        }
    }
    return covered;
}

bool contains(const std::vector<Oid>& v, const Oid& oid) { return std::find(v.begin(), v.end(), oid) != v.end(); }

Satisfaction decide_with(const Translator& kb, const SecurityExpression& req, const ExpressionSet& caps,
                         const std::set<Oid>& covered, DecisionPolicy policy) {
    if (effective_dimension(req) == Dimension::Technique) {
        return contains(caps.operatives(), req.operative()) ? Satisfaction::Satisfied : Satisfaction::Unsatisfied;
    }
    for (const auto& entry : kb.translate(req, Dimension::Function).output) {
        if (covered.count(entry.operative()) == 0) return Satisfaction::Unsatisfied;
    }
    if (policy.require_technique) {
        for (const auto& entry : kb.translate(req, Dimension::Technique).output) {
            if (effective_dimension(entry) == Dimension::Technique) return Satisfaction::Unsatisfied;
        }
    }
    return Satisfaction::Satisfied;
}

SecurityExpression extend(const SecurityExpression& base, const std::vector<Oid>& tail) {
    auto segments = base.segments();
    for (const auto& oid : tail) {
        if (oid.dimension() > segments.back().dimension()) segments.push_back(oid);
    }
    return SecurityExpression(std::move(segments));
}

/// Entries for one requirement, or nullopt when some part cannot be provided.
std::optional<std::vector<SecurityExpression>> concretize(const Translator& kb, const SecurityExpression& req,
                                                          const std::vector<Oid>& peer, const std::vector<Oid>& own) {
    if (effective_dimension(req) == Dimension::Technique) {
        if (contains(own, req.operative())) return std::vector<SecurityExpression>{req};
        return std::nullopt;
    }

    std::vector<SecurityExpression> entries;
    for (const auto& fn : kb.translate(req, Dimension::Function).output) {
        const Oid& function = fn.operative();
        std::vector<Oid> suggested;
        if (function.dimension() == Dimension::Function) {
            for (const auto& t : kb.translate(SecurityExpression(function), Dimension::Technique).output) {
                if (effective_dimension(t) == Dimension::Technique) suggested.push_back(t.operative());
            }
        }
        if (suggested.empty()) {
            // nothing more concrete exists; the builder must assert it as is
            if (!contains(own, function)) return std::nullopt;
            entries.push_back(extend(req, {function}));
            continue;
        }

        std::vector<Oid> shared;
        std::vector<Oid> own_only;
        for (const auto& t : suggested) {
            if (!contains(own, t)) continue;
            (contains(peer, t) ? shared : own_only).push_back(t);
        }
        const auto& tier = shared.empty() ? own_only : shared;
        if (tier.empty()) return std::nullopt;
        auto best = std::min_element(tier.begin(), tier.end(),
                                     [](const Oid& a, const Oid& b) { return a.str() < b.str(); });
        entries.push_back(extend(req, {function, *best}));
    }
    return entries;
}

}  // namespace

std::string_view overall_name(Overall o) noexcept {
    switch (o) {
        case Overall::Accept: return "Accept";
        case Overall::Counter: return "Counter";
        case Overall::Reject: return "Reject";
    }
    return "?";
}

Satisfaction decide_one(const Translator& kb, const SecurityExpression& req, const ExpressionSet& caps,
                        DecisionPolicy policy) {
    return decide_with(kb, req, caps, covered_functions(kb, caps), policy);
}

Verdict decide_set(const Translator& kb, const ExpressionSet& reqs, const ExpressionSet& caps, DecisionPolicy policy,
                   const ExpressionSet& peer_caps) {
    Verdict verdict;
    const auto covered = covered_functions(kb, caps);
    bool all = true;
    for (const auto& req : reqs) {
        auto s = decide_with(kb, req, caps, covered, policy);
        all = all && s == Satisfaction::Satisfied;
        verdict.per_requirement.emplace_back(req, s);
    }
    if (all) {
        verdict.overall = Overall::Accept;
        return verdict;
    }
    auto counter = build_counterproposal(kb, reqs, peer_caps, caps);
    verdict.overall = counter.unsatisfiable.empty() ? Overall::Counter : Overall::Reject;
    verdict.counter = std::move(counter);
    return verdict;
}

CounterProposal build_counterproposal(const Translator& kb, const ExpressionSet& reqs, const ExpressionSet& peer_caps,
                                      const ExpressionSet& own_caps) {
    const auto peer = peer_caps.operatives();
    const auto own = own_caps.operatives();
    CounterProposal out;
    for (const auto& req : reqs) {
        std::optional<std::vector<SecurityExpression>> entries;
        try {
            entries = concretize(kb, req, peer, own);
        } catch (const UnknownOidError&) {
            entries.reset();
        }
        if (!entries) {
            out.unsatisfiable.push_back(req);
            continue;
        }
        for (auto& e : *entries) out.entries.insert(std::move(e));
    }
    return out;
}

}  // namespace ssla
