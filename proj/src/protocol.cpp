#include "ssla/protocol.hpp"

#include <cstdlib>
#include <stdexcept>

#include "ssla/error.hpp"

namespace ssla {

namespace {

constexpr std::size_t kNonceBytes = 16;

ExpressionSet with_role(const ExpressionSet& set, ExpressionRole role) {
    ExpressionSet out(role);
    for (const auto& item : set) out.insert(item);
    return out;
}

[[noreturn]] void reject(ErrorCode code, const std::string& what) { throw ProtocolError(code, what); }

}  // namespace

std::string_view phase_name(Phase p) noexcept {
    switch (p) {
        case Phase::Idle: return "Idle";
        case Phase::ProposalSent: return "ProposalSent";
        case Phase::ProposalReceived: return "ProposalReceived";
        case Phase::Agreed: return "Agreed";
        case Phase::Cancelled: return "Cancelled";
    }
    return "?";
}

bool is_terminal(Phase p) noexcept { return p == Phase::Agreed || p == Phase::Cancelled; }

bool is_legal_transition(Phase from, Phase to) noexcept {
    switch (from) {
        case Phase::Idle:
            return to == Phase::ProposalSent || to == Phase::ProposalReceived || to == Phase::Cancelled;
        case Phase::ProposalSent:
            return to == Phase::ProposalReceived || to == Phase::Agreed || to == Phase::Cancelled;
        case Phase::ProposalReceived:
            return to == Phase::ProposalSent || to == Phase::Agreed || to == Phase::Cancelled;
        case Phase::Agreed:
        case Phase::Cancelled:
            return false;
    }
    return false;
}

Decision Decision::counter(ExpressionSet reqs, ExpressionSet caps) {
    Decision d;
    d.kind = Kind::Counter;
    d.requirements = with_role(reqs, ExpressionRole::Requirement);
    d.capabilities = with_role(caps, ExpressionRole::Capability);
    return d;
}

Agent::Agent(PrivateKey key, std::shared_ptr<Strategy> strategy, ProtocolPolicy policy, Clock clock,
             std::shared_ptr<RandomSource> rng)
    : key_(std::move(key)),
      public_key_(key_.public_key()),
      identity_(derive_identity(public_key_)),
      strategy_(std::move(strategy)),
      policy_(policy),
      clock_(std::move(clock)),
      rng_(std::move(rng)) {
    if (!strategy_ || !rng_ || !clock_) throw std::invalid_argument("agent needs a strategy, a clock and a random source");
    if (policy_.max_rounds < 1) throw std::invalid_argument("max_rounds must be at least 1");
}

PowPolicy Agent::effective_pow() const {
    auto pow = policy_.pow;
    if (!policy_.require_pow) pow.required_bits = 0;
    return pow;
}

std::string Agent::nonce_key(const NegotiationId& id, const Bytes& nonce) const {
    return id.hex() + ":" + to_hex(nonce);
}

bool Agent::has_open_session_with(const PartyIdentity& peer) const {
    for (const auto& [_, s] : sessions_) {
        if (s.peer == peer && !is_terminal(s.phase)) return true;
    }
    return false;
}

void Agent::move_to(NegotiationState& s, Phase next) {
    if (!is_legal_transition(s.phase, next)) {
        throw std::logic_error("illegal transition " + std::string(phase_name(s.phase)) + " -> " +
                               std::string(phase_name(next)));
    }
    s.transitions.emplace_back(s.phase, next);
    s.phase = next;
}

SslaProposal Agent::initiate(const PartyIdentity& responder, const ExpressionSet& requirements,
                             const ExpressionSet& capabilities, std::optional<std::string> kb_uri) {
    std::lock_guard lock(mutex_);
    if (responder == identity_) reject(ErrorCode::StateViolation, "cannot negotiate with oneself");
    if (has_open_session_with(responder)) {
        reject(ErrorCode::StateViolation, "a negotiation with " + responder.str() + " is still open");
    }
    const auto now = clock_();

    SslaProposal p;
    p.round = 1;
    p.requirements = with_role(requirements, ExpressionRole::Requirement);
    p.capabilities = with_role(capabilities, ExpressionRole::Capability);
    p.proposer = identity_;
    p.responder = responder;
    p.nonce = rng_->bytes(kNonceBytes);
    p.timestamp = now;
    p.kb_uri = std::move(kb_uri);
    p.pow = mint(responder.hex(), StampExtension{identity_, responder, p.nonce}, effective_pow(), *rng_, now);
    p.negotiation_id = negotiation_id_from(*p.pow);
    Message msg{p};
    sign_message(msg, key_);
    p = std::get<SslaProposal>(msg);

    NegotiationState s;
    s.id = p.negotiation_id;
    s.initiator = identity_;
    s.responder = responder;
    s.peer = responder;
    s.round = 1;
    move_to(s, Phase::ProposalSent);
    commit_outbound(s, msg, now);
    s.last_sent_proposal = p;
    sessions_[s.id] = std::move(s);
    return p;
}

std::optional<Message> Agent::receive(const Message& msg) {
    std::lock_guard lock(mutex_);
    const auto now = clock_();

    for (auto it = seen_nonces_.begin(); it != seen_nonces_.end();) {
        it = it->second < now ? seen_nonces_.erase(it) : std::next(it);
    }
    spent_stamps_.prune(now);

    if (sender_of(msg) == identity_) reject(ErrorCode::StateViolation, "message claims to come from this party");
    if (seen_nonces_.count(nonce_key(negotiation_of(msg), nonce_of(msg))) != 0) {
        reject(ErrorCode::ReplayedNonce, "nonce already seen in negotiation " + negotiation_of(msg).hex());
    }
    if (std::llabs(timestamp_of(msg) - now) > policy_.timestamp_window.count()) {
        reject(ErrorCode::StaleTimestamp, "timestamp " + std::to_string(timestamp_of(msg)) + " is outside the window");
    }

    if (const auto* p = std::get_if<SslaProposal>(&msg)) return on_proposal(*p, now);
    if (const auto* c = std::get_if<SslaConfirmation>(&msg)) return on_confirmation(*c);
    return on_cancel(std::get<CancelMessage>(msg));
}

void Agent::check_stamp_for(const SslaProposal& p, std::int64_t now) const {
    StampExtension ext;
    try {
        ext = StampExtension::decode(p.pow->extension);
    } catch (const FormatError& e) {
        reject(ErrorCode::InvalidPow, std::string("bad stamp extension: ") + e.what());
    }
    if (ext.initiator.digest != p.proposer.digest || ext.responder.digest != identity_.digest || ext.nonce != p.nonce) {
        reject(ErrorCode::InvalidPow, "stamp extension does not match the proposal");
    }
    auto check = check_stamp(*p.pow, identity_.hex(), effective_pow(), spent_stamps_, now);
    if (check != StampCheck::Ok) reject(ErrorCode::InvalidPow, "stamp rejected: " + std::string(stamp_check_name(check)));
}

std::optional<Message> Agent::on_proposal(const SslaProposal& p, std::int64_t now) {
    if (p.responder != identity_) reject(ErrorCode::StateViolation, "proposal is addressed to " + p.responder.str());
    if (p.round > policy_.max_rounds) reject(ErrorCode::StateViolation, "round limit exceeded");

    NegotiationState s;
    auto it = sessions_.find(p.negotiation_id);
    if (it == sessions_.end()) {
        if (p.round != 1) reject(ErrorCode::UnknownNegotiation, "no negotiation " + p.negotiation_id.hex());
        if (has_open_session_with(p.proposer)) {
            reject(ErrorCode::StateViolation, "a negotiation with " + p.proposer.str() + " is still open");
        }
        if (!p.pow) reject(ErrorCode::InvalidPow, "round-one proposal carries no stamp");
        if (negotiation_id_from(*p.pow) != p.negotiation_id) {
            reject(ErrorCode::InvalidPow, "negotiation id is not derived from the stamp");
        }
        check_stamp_for(p, now);
        authenticate(Message{p});
        s.id = p.negotiation_id;
        s.initiator = p.proposer;
        s.responder = identity_;
        s.peer = p.proposer;
    } else {
        s = it->second;
        if (s.phase != Phase::ProposalSent) {
            reject(ErrorCode::StateViolation, "not expecting a proposal in phase " + std::string(phase_name(s.phase)));
        }
        if (p.proposer != s.peer) reject(ErrorCode::StateViolation, "proposal from a party outside this negotiation");
        if (p.round != s.round + 1) {
            reject(ErrorCode::StateViolation,
                   "expected round " + std::to_string(s.round + 1) + ", got " + std::to_string(p.round));
        }
        if (policy_.pow_every_proposal && !p.pow) reject(ErrorCode::InvalidPow, "proposal carries no stamp");
        if (p.pow) check_stamp_for(p, now);
        authenticate(Message{p});
    }

    commit_inbound(s, Message{p}, now);
    s.round = p.round;
    move_to(s, Phase::ProposalReceived);

    Decision d;
    try {
        d = strategy_->on_proposal(p, s);
    } catch (const std::exception& e) {
        d = Decision::cancel(std::string("cannot evaluate proposal: ") + e.what());
    }
    if (d.kind == Decision::Kind::Counter && p.round + 1 > policy_.max_rounds) {
        d = Decision::cancel("round limit of " + std::to_string(policy_.max_rounds) + " reached");
    }

    std::optional<Message> reply;
    switch (d.kind) {
        case Decision::Kind::Accept: {
            SslaConfirmation c;
            c.negotiation_id = s.id;
            c.confirmer = identity_;
            c.proposal = p;
            c.nonce = rng_->bytes(kNonceBytes);
            c.timestamp = now;
            Message out{c};
            sign_message(out, key_);
            commit_outbound(s, out, now);
            move_to(s, Phase::Agreed);
            s.record = build_record(s, std::get<SslaConfirmation>(out));
            reply = std::move(out);
            break;
        }
        case Decision::Kind::Counter: {
            auto next = make_proposal(s, p.round + 1, d.requirements, d.capabilities, now);
            commit_outbound(s, Message{next}, now);
            s.round = next.round;
            s.last_sent_proposal = next;
            move_to(s, Phase::ProposalSent);
            reply = Message{std::move(next)};
            break;
        }
        case Decision::Kind::Cancel: {
            auto cancel_msg = make_cancel(s, d.reason, now);
            commit_outbound(s, Message{cancel_msg}, now);
            s.cancel_reason = d.reason;
            move_to(s, Phase::Cancelled);
            reply = Message{std::move(cancel_msg)};
            break;
        }
    }
    sessions_[s.id] = std::move(s);
    return reply;
}

std::optional<Message> Agent::on_confirmation(const SslaConfirmation& c) {
    auto it = sessions_.find(c.negotiation_id);
    if (it == sessions_.end()) reject(ErrorCode::UnknownNegotiation, "no negotiation " + c.negotiation_id.hex());
    NegotiationState s = it->second;
    if (s.phase != Phase::ProposalSent) {
        reject(ErrorCode::StateViolation, "not expecting a confirmation in phase " + std::string(phase_name(s.phase)));
    }
    if (c.confirmer != s.peer) reject(ErrorCode::StateViolation, "confirmation from a party outside this negotiation");
    if (!s.last_sent_proposal ||
        encode_message(Message{c.proposal}) != encode_message(Message{*s.last_sent_proposal})) {
        reject(ErrorCode::MismatchedEmbedding, "confirmation does not embed the proposal this party sent");
    }
    authenticate(Message{c});

    commit_inbound(s, Message{c}, clock_());
    move_to(s, Phase::Agreed);
    s.record = build_record(s, c);
    sessions_[s.id] = std::move(s);
    return std::nullopt;
}

std::optional<Message> Agent::on_cancel(const CancelMessage& m) {
    auto it = sessions_.find(m.negotiation_id);
    if (it == sessions_.end()) reject(ErrorCode::UnknownNegotiation, "no negotiation " + m.negotiation_id.hex());
    NegotiationState s = it->second;
    if (is_terminal(s.phase)) {
        reject(ErrorCode::StateViolation, "negotiation already " + std::string(phase_name(s.phase)));
    }
    if (m.sender != s.peer) reject(ErrorCode::StateViolation, "cancel from a party outside this negotiation");
    authenticate(Message{m});

    commit_inbound(s, Message{m}, clock_());
    s.cancel_reason = m.reason;
    move_to(s, Phase::Cancelled);
    sessions_[s.id] = std::move(s);
    return std::nullopt;
}

CancelMessage Agent::cancel(const NegotiationId& id, std::string reason) {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) reject(ErrorCode::UnknownNegotiation, "no negotiation " + id.hex());
    NegotiationState s = it->second;
    if (is_terminal(s.phase)) {
        reject(ErrorCode::StateViolation, "negotiation already " + std::string(phase_name(s.phase)));
    }
    const auto now = clock_();
    auto m = make_cancel(s, reason, now);
    commit_outbound(s, Message{m}, now);
    s.cancel_reason = std::move(reason);
    move_to(s, Phase::Cancelled);
    sessions_[id] = std::move(s);
    return m;
}

void Agent::commit_inbound(NegotiationState& s, const Message& msg, std::int64_t now) {
    s.history.push_back(msg);
    seen_nonces_[nonce_key(negotiation_of(msg), nonce_of(msg))] = now + policy_.timestamp_window.count() * 2;
    if (const auto* p = std::get_if<SslaProposal>(&msg); p != nullptr && p->pow) {
        const auto pow = effective_pow();
        spent_stamps_.insert(p->pow->str(), p->pow->date_seconds() + pow.max_stamp_age.count() + pow.clock_skew.count());
    }
}

void Agent::commit_outbound(NegotiationState& s, const Message& msg, std::int64_t now) {
    s.history.push_back(msg);
    seen_nonces_[nonce_key(negotiation_of(msg), nonce_of(msg))] = now + policy_.timestamp_window.count() * 2;
}

SslaRecord Agent::build_record(const NegotiationState& s, const SslaConfirmation& c) {
    SslaRecord r;
    r.negotiation_id = s.id;
    r.agreed_entries = with_role(c.proposal.requirements, ExpressionRole::SslaEntry);
    r.proposal_signer = c.proposal.proposer;
    r.proposal_signature = c.proposal.signature;
    r.confirmation_signer = c.confirmer;
    r.confirmation_signature = c.signature;
    r.confirmation = c;
    r.transcript = s.history;
    return r;
}

SslaProposal Agent::make_proposal(const NegotiationState& s, int round, const ExpressionSet& reqs,
                                  const ExpressionSet& caps, std::int64_t now) {
    SslaProposal p;
    p.negotiation_id = s.id;
    p.round = round;
    p.requirements = with_role(reqs, ExpressionRole::Requirement);
    p.capabilities = with_role(caps, ExpressionRole::Capability);
    p.proposer = identity_;
    p.responder = s.peer;
    p.nonce = rng_->bytes(kNonceBytes);
    p.timestamp = now;
    if (policy_.pow_every_proposal) {
        p.pow = mint(s.peer.hex(), StampExtension{identity_, s.peer, p.nonce}, effective_pow(), *rng_, now);
    }
    Message msg{std::move(p)};
    sign_message(msg, key_);
    return std::get<SslaProposal>(std::move(msg));
}

CancelMessage Agent::make_cancel(const NegotiationState& s, std::string reason, std::int64_t now) {
    CancelMessage m;
    m.negotiation_id = s.id;
    m.sender = identity_;
    m.round = s.round;
    m.reason = std::move(reason);
    m.nonce = rng_->bytes(kNonceBytes);
    m.timestamp = now;
    Message msg{std::move(m)};
    sign_message(msg, key_);
    return std::get<CancelMessage>(std::move(msg));
}

std::optional<NegotiationState> Agent::state(const NegotiationId& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return std::nullopt;
    return it->second;
}

std::optional<SslaRecord> Agent::record(const NegotiationId& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return std::nullopt;
    return it->second.record;
}

std::vector<NegotiationId> Agent::negotiations() const {
    std::lock_guard lock(mutex_);
    std::vector<NegotiationId> ids;
    for (const auto& [id, _] : sessions_) ids.push_back(id);
    return ids;
}

}  // namespace ssla
