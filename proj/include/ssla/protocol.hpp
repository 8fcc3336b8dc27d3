#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssla/crypto.hpp"
#include "ssla/hashcash.hpp"
#include "ssla/messages.hpp"
#include "ssla/runtime.hpp"

namespace ssla {

enum class Phase { Idle, ProposalSent, ProposalReceived, Agreed, Cancelled };

std::string_view phase_name(Phase p) noexcept;
bool is_terminal(Phase p) noexcept;
/// Idle -> ProposalSent | ProposalReceived, ProposalSent <-> ProposalReceived,
/// any non-terminal phase -> Agreed | Cancelled.
bool is_legal_transition(Phase from, Phase to) noexcept;

struct ProtocolPolicy {
    PowPolicy pow;
    /// When false the round-one stamp is still required (it names the
    /// negotiation) but may be minted at zero bits; the signature then serves
    /// as the initiator's proof of commitment.
    bool require_pow = true;
    /// Require a fresh stamp on every proposal, not just round one.
    bool pow_every_proposal = false;
    int max_rounds = 8;
    std::chrono::seconds timestamp_window{300};
};

struct NegotiationState {
    NegotiationId id;
    PartyIdentity initiator;
    PartyIdentity responder;
    PartyIdentity peer;
    Phase phase = Phase::Idle;
    int round = 0;
    /// Every accepted signed message, sent or received, in order. Append-only.
    std::vector<Message> history;
    std::vector<std::pair<Phase, Phase>> transitions;
    std::optional<SslaProposal> last_sent_proposal;
    std::optional<SslaRecord> record;
    std::string cancel_reason;
};

struct Decision {
    enum class Kind { Accept, Counter, Cancel };

    Kind kind = Kind::Cancel;
    ExpressionSet requirements{ExpressionRole::Requirement};
    ExpressionSet capabilities{ExpressionRole::Capability};
    std::string reason;

    static Decision accept() {
        Decision d;
        d.kind = Kind::Accept;
        return d;
    }
    static Decision counter(ExpressionSet reqs, ExpressionSet caps);
    static Decision cancel(std::string reason) {
        Decision d;
        d.reason = std::move(reason);
        return d;
    }
};

/// How a party answers an incoming proposal.
class Strategy {
public:
    virtual ~Strategy() = default;
    virtual Decision on_proposal(const SslaProposal& proposal, const NegotiationState& state) = 0;
};

/// One negotiating party. Owns its sessions (keyed by NegotiationId) and the
/// replay sets shared between them; all entry points serialize on one mutex.
///
/// `receive` validates completely before touching any state: a rejected
/// message throws ProtocolError and leaves the agent exactly as it was.
class Agent {
public:
    Agent(PrivateKey key, std::shared_ptr<Strategy> strategy, ProtocolPolicy policy, Clock clock,
          std::shared_ptr<RandomSource> rng);

    const PartyIdentity& identity() const noexcept { return identity_; }
    const PublicKey& public_key() const noexcept { return public_key_; }
    const ProtocolPolicy& policy() const noexcept { return policy_; }

    /// Mints the round-one stamp, derives the negotiation id and signs.
    SslaProposal initiate(const PartyIdentity& responder, const ExpressionSet& requirements,
                          const ExpressionSet& capabilities, std::optional<std::string> kb_uri = std::nullopt);

    /// Handles a proposal, confirmation or cancel and returns the signed
    /// reply, if any.
    std::optional<Message> receive(const Message& msg);

    CancelMessage cancel(const NegotiationId& id, std::string reason);

    std::optional<NegotiationState> state(const NegotiationId& id) const;
    std::optional<SslaRecord> record(const NegotiationId& id) const;
    std::vector<NegotiationId> negotiations() const;

private:
    std::optional<Message> on_proposal(const SslaProposal& p, std::int64_t now);
    std::optional<Message> on_confirmation(const SslaConfirmation& c);
    std::optional<Message> on_cancel(const CancelMessage& m);

    void check_stamp_for(const SslaProposal& p, std::int64_t now) const;
    void commit_inbound(NegotiationState& s, const Message& msg, std::int64_t now);
    void commit_outbound(NegotiationState& s, const Message& msg, std::int64_t now);
    static void move_to(NegotiationState& s, Phase next);
    static SslaRecord build_record(const NegotiationState& s, const SslaConfirmation& c);

    SslaProposal make_proposal(const NegotiationState& s, int round, const ExpressionSet& reqs,
                               const ExpressionSet& caps, std::int64_t now);
    CancelMessage make_cancel(const NegotiationState& s, std::string reason, std::int64_t now);
    std::string nonce_key(const NegotiationId& id, const Bytes& nonce) const;
    bool has_open_session_with(const PartyIdentity& peer) const;
    PowPolicy effective_pow() const;

    PrivateKey key_;
    PublicKey public_key_;
    PartyIdentity identity_;
    std::shared_ptr<Strategy> strategy_;
    ProtocolPolicy policy_;
    Clock clock_;
    std::shared_ptr<RandomSource> rng_;

    mutable std::mutex mutex_;
    std::map<NegotiationId, NegotiationState> sessions_;
    std::map<std::string, std::int64_t> seen_nonces_;
    StampReplaySet spent_stamps_;
};

}  // namespace ssla
