#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "ssla/agents.hpp"
#include "ssla/audit.hpp"
#include "ssla/decision.hpp"
#include "ssla/protocol.hpp"
#include "ssla/strategy.hpp"

namespace testing {

using namespace ssla;

inline const std::filesystem::path& fixture_dir() {
    static const std::filesystem::path dir(SSLA_FIXTURE_DIR);
    return dir;
}

inline std::filesystem::path fixture(const std::string& rel) { return fixture_dir() / rel; }

inline std::shared_ptr<const KnowledgeBase> seed_kb() {
    static auto kb = std::make_shared<const KnowledgeBase>(KnowledgeBase::load(fixture("kb/kb.json")));
    return kb;
}

/// "user", "sp" or "mallory".
inline const PrivateKey& party_key(const std::string& name) {
    static const PrivateKey user = PrivateKey::load(fixture("keys/user.pem"));
    static const PrivateKey sp = PrivateKey::load(fixture("keys/sp.pem"));
    static const PrivateKey mallory = PrivateKey::load(fixture("keys/mallory.pem"));
    if (name == "user") return user;
    if (name == "sp") return sp;
    return mallory;
}

inline SecurityExpression X(const std::string& s) { return parse_expression(s); }

inline ExpressionSet set_of(ExpressionRole role, const std::vector<std::string>& items) {
    return ExpressionSet::from_strings(role, items);
}
inline ExpressionSet reqs(const std::vector<std::string>& items) { return set_of(ExpressionRole::Requirement, items); }
inline ExpressionSet caps(const std::vector<std::string>& items) { return set_of(ExpressionRole::Capability, items); }

inline std::vector<std::string> strings_of(const std::vector<SecurityExpression>& v) {
    std::vector<std::string> out;
    for (const auto& e : v) out.push_back(e.str());
    return out;
}

constexpr std::int64_t kTestNow = 1371081600;

/// The hotspot scenario's capability lists.
inline ExpressionSet sp_caps() {
    return caps({"Technique.3.1", "Technique.3.3", "Technique.3.5", "Technique.4.2", "Technique.7.2", "Technique.7.3",
                 "Function.15"});
}
inline ExpressionSet user_caps() { return caps({"Technique.7.2", "Technique.4.2"}); }
inline ExpressionSet user_original_reqs() { return reqs({"Risk.1.1.1", "Risk.1.1.2"}); }
inline ExpressionSet user_function_reqs() {
    return reqs({"Function.12.1.3", "Function.17", "Function.23.3", "Function.15", "Function.19.12.2"});
}

inline ProtocolPolicy test_policy(int bits = 8) {
    ProtocolPolicy p;
    p.pow.required_bits = bits;
    return p;
}

struct Pair {
    std::shared_ptr<Agent> user;
    std::shared_ptr<Agent> sp;
};

/// User with the scenario's initiator strategy, SP with the responder
/// strategy (require_technique on), both on a fixed clock.
inline Pair scenario_pair(std::uint64_t seed = 1, ProtocolPolicy policy = test_policy(),
                          ExpressionSet sp_capabilities = sp_caps()) {
    auto kb = seed_kb();
    Pair p;
    p.user = std::make_shared<Agent>(party_key("user"), std::make_shared<InitiatorStrategy>(kb, user_original_reqs()),
                                     policy, fixed_clock(kTestNow), std::make_shared<SeededRandom>(seed));
    p.sp = std::make_shared<Agent>(party_key("sp"),
                                   std::make_shared<ResponderStrategy>(kb, std::move(sp_capabilities),
                                                                       DecisionPolicy{true}),
                                   policy, fixed_clock(kTestNow), std::make_shared<SeededRandom>(seed + 1000));
    return p;
}

/// Runs a negotiation to completion by direct message passing. Returns the
/// full trace.
inline std::vector<Message> drive(Agent& initiator, Agent& responder, const SslaProposal& first) {
    std::vector<Message> trace{first};
    std::optional<Message> next = Message{first};
    bool to_responder = true;
    while (next) {
        auto reply = (to_responder ? responder : initiator).receive(*next);
        to_responder = !to_responder;
        if (reply) trace.push_back(*reply);
        next = reply;
    }
    return trace;
}

}  // namespace testing
