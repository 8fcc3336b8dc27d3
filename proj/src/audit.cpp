#include "ssla/audit.hpp"

#include <set>
#include <sstream>

#include "ssla/error.hpp"
#include "ssla/hashcash.hpp"

namespace ssla {

namespace {

class Checklist {
public:
    explicit Checklist(AuditReport& report) : report_(report) {}

    void add(std::string name, bool pass, std::string detail = {}) {
        report_.checks.push_back({std::move(name), pass, std::move(detail)});
    }

    template <typename F>
    void run(std::string name, F&& check) {
        try {
            auto failure = check();
            add(std::move(name), failure.empty(), failure);
        } catch (const std::exception& e) {
            add(std::move(name), false, e.what());
        }
    }

private:
    AuditReport& report_;
};

const PublicKey* key_for(const std::vector<PublicKey>& keys, const PartyIdentity& who) {
    for (const auto& k : keys) {
        if (derive_identity(k) == who) return &k;
    }
    return nullptr;
}

std::string verify_with(const Message& msg, const PublicKey* key, const std::string& what) {
    if (key == nullptr) return what + " unverifiable: no public key supplied for " + sender_of(msg).str();
    const auto& sig = std::visit([](const auto& m) -> const Signature& { return m.signature; }, msg);
    if (!verify(signing_bytes(msg), sig, *key)) return what + " does not verify";
    return {};
}

std::string identity_check(const PartyIdentity& who, const Bytes& embedded_key, const std::vector<PublicKey>& keys,
                           const std::string& role) {
    if (who.binding != IdentityBinding::PublicKeyHash) return role + " identity is not a key hash";
    const auto* key = key_for(keys, who);
    if (key == nullptr) return "no public key supplied for " + role + " " + who.str();
    if (key->der() != embedded_key) return role + " key embedded in the message differs from the supplied key";
    return {};
}

}  // namespace

const AuditCheck* AuditReport::find(std::string_view name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

AuditReport audit_record(const SslaRecord& r, const std::vector<PublicKey>& keys, AuditOptions options) {
    AuditReport report;
    report.agreed_entries = r.agreed_entries;
    report.proposer = r.proposal_signer;
    report.confirmer = r.confirmation_signer;
    report.last_signer = r.confirmation_signer;
    Checklist checks(report);

    const auto& conf = r.confirmation;
    const auto& prop = conf.proposal;

    checks.run("record.structure", [&]() -> std::string {
        if (r.proposal_signer != prop.proposer) return "proposal_signer is not the embedded proposal's sender";
        if (r.proposal_signature != prop.signature) return "proposal_signature differs from the embedded proposal";
        if (r.confirmation_signer != conf.confirmer) return "confirmation_signer is not the confirmation's sender";
        if (r.confirmation_signature != conf.signature) return "confirmation_signature differs from the confirmation";
        if (r.negotiation_id != conf.negotiation_id || r.negotiation_id != prop.negotiation_id) {
            return "negotiation id differs between record, confirmation and proposal";
        }
        if (r.transcript.empty()) return "transcript is empty";
        const auto* last = std::get_if<SslaConfirmation>(&r.transcript.back());
        if (last == nullptr || *last != conf) return "transcript does not end with the recorded confirmation";
        return {};
    });

    checks.run("agreed_entries.signed", [&]() -> std::string {
        ExpressionSet signed_terms(ExpressionRole::SslaEntry);
        for (const auto& e : prop.requirements) signed_terms.insert(e);
        if (signed_terms != r.agreed_entries) return "agreed entries differ from the signed proposal";
        return {};
    });

    checks.run("identity.proposer", [&] { return identity_check(prop.proposer, prop.sender_key, keys, "proposer"); });
    checks.run("identity.confirmer",
               [&] { return identity_check(conf.confirmer, conf.sender_key, keys, "confirmer"); });

    checks.run("proposal.signature",
               [&] { return verify_with(Message{prop}, key_for(keys, prop.proposer), "proposal signature"); });
    checks.run("confirmation.signature",
               [&] { return verify_with(Message{conf}, key_for(keys, conf.confirmer), "confirmation signature"); });

    checks.run("proposal.embedding", [&]() -> std::string {
        if (r.transcript.size() < 2) return "transcript has no proposal before the confirmation";
        const auto* before = std::get_if<SslaProposal>(&r.transcript[r.transcript.size() - 2]);
        if (before == nullptr || encode_message(Message{*before}) != encode_message(Message{prop})) {
            return "embedded proposal is not the last proposal of the transcript";
        }
        if (prop.responder != conf.confirmer) return "confirmer is not the proposal's responder";
        return {};
    });

    const SslaProposal* opening = r.transcript.empty() ? nullptr : std::get_if<SslaProposal>(&r.transcript.front());

    checks.run("negotiation_id", [&]() -> std::string {
        if (opening == nullptr || opening->round != 1 || !opening->pow) return "transcript does not open with a stamped round-one proposal";
        if (negotiation_id_from(*opening->pow) != r.negotiation_id) return "negotiation id is not derived from the round-one stamp";
        for (const auto& m : r.transcript) {
            if (negotiation_of(m) != r.negotiation_id) return "transcript mixes negotiations";
        }
        return {};
    });

    checks.run("pow.stamp", [&]() -> std::string {
        if (opening == nullptr || !opening->pow) return "no round-one stamp";
        const auto& stamp = *opening->pow;
        auto text = stamp.str();
        int zeros = leading_zero_bits(sha1(as_bytes(text)));
        if (zeros < stamp.bits) return "stamp claims " + std::to_string(stamp.bits) + " bits but has " + std::to_string(zeros);
        if (stamp.bits < options.min_pow_bits) return "stamp claims fewer than " + std::to_string(options.min_pow_bits) + " bits";
        if (stamp.resource != opening->responder.hex()) return "stamp resource is not the responder";
        auto ext = StampExtension::decode(stamp.extension);
        if (ext.initiator.digest != opening->proposer.digest || ext.responder.digest != opening->responder.digest ||
            ext.nonce != opening->nonce) {
            return "stamp extension does not bind the opening proposal";
        }
        return {};
    });

    checks.run("transcript.signatures", [&]() -> std::string {
        for (std::size_t i = 0; i < r.transcript.size(); ++i) {
            const auto& m = r.transcript[i];
            const auto& who = sender_of(m);
            if (who != prop.proposer && who != conf.confirmer) return "message " + std::to_string(i) + " from an outside party";
            try {
                authenticate(m);
            } catch (const Error& e) {
                return "message " + std::to_string(i) + ": " + e.what();
            }
            auto failure = verify_with(m, key_for(keys, who), "message " + std::to_string(i) + " signature");
            if (!failure.empty()) return failure;
        }
        return {};
    });

    checks.run("transcript.order", [&]() -> std::string {
        if (opening == nullptr) return "transcript does not open with a proposal";
        int expected_round = 1;
        const PartyIdentity* expected_sender = &opening->proposer;
        std::set<Bytes> nonces;
        std::int64_t last_time = opening->timestamp;
        for (std::size_t i = 0; i < r.transcript.size(); ++i) {
            const auto& m = r.transcript[i];
            if (!nonces.insert(nonce_of(m)).second) return "nonce reused at message " + std::to_string(i);
            if (timestamp_of(m) < last_time) return "timestamps go backwards at message " + std::to_string(i);
            last_time = timestamp_of(m);
            if (sender_of(m) != *expected_sender) return "message " + std::to_string(i) + " out of turn";
            const bool is_last = i + 1 == r.transcript.size();
            if (const auto* p = std::get_if<SslaProposal>(&m)) {
                if (is_last) return "transcript ends with a proposal";
                if (p->round != expected_round) return "round " + std::to_string(p->round) + " out of sequence";
                ++expected_round;
                expected_sender = &p->responder;
            } else if (!is_last) {
                return "message " + std::to_string(i) + " is not a proposal";
            }
        }
        return {};
    });

    checks.run("parties", [&]() -> std::string {
        if (prop.proposer == prop.responder) return "a party cannot agree with itself";
        if (opening != nullptr) {
            std::set<std::string> parties{opening->proposer.str(), opening->responder.str()};
            if (parties.count(prop.proposer.str()) == 0 || parties.count(conf.confirmer.str()) == 0) {
                return "signers are not the parties of the opening proposal";
            }
        }
        return {};
    });

    bool all = true;
    for (const auto& c : report.checks) all = all && c.pass;
    report.verdict = all ? AuditReport::Verdict::Valid : AuditReport::Verdict::Invalid;
    return report;
}

AuditReport audit_record_text(std::string_view text, const std::vector<PublicKey>& keys, AuditOptions options) {
    SslaRecord record;
    try {
        record = decode_record(text);
    } catch (const std::exception& e) {
        AuditReport report;
        report.checks.push_back({"record.decode", false, e.what()});
        return report;
    }
    // Stored evidence must already be canonical; a re-encoding that differs
    // means the file was edited after the fact.
    auto report = audit_record(record, keys, options);
    bool canonical = encode_record(record) == text;
    report.checks.insert(report.checks.begin(),
                         {"record.decode", canonical, canonical ? "" : "stored bytes are not in canonical form"});
    if (!canonical) report.verdict = AuditReport::Verdict::Invalid;
    return report;
}

bool compare_evidence(const SslaRecord& a, const SslaRecord& b) { return encode_record(a) == encode_record(b); }

std::string format_report(const AuditReport& report) {
    std::ostringstream out;
    out << "verdict: " << (report.valid() ? "Valid" : "Invalid") << "\n";
    if (report.proposer) out << "proposer: " << report.proposer->str() << "\n";
    if (report.confirmer) out << "confirmer: " << report.confirmer->str() << "\n";
    if (report.last_signer) out << "last signer: " << report.last_signer->str() << "\n";
    out << "agreed entries:\n";
    for (const auto& e : report.agreed_entries) out << "  " << e.str() << "\n";
    out << "checks:\n";
    for (const auto& c : report.checks) {
        out << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name;
        if (!c.detail.empty()) out << ": " << c.detail;
        out << "\n";
    }
    return out.str();
}

Json report_to_json(const AuditReport& report) {
    Json checks = Json::array();
    for (const auto& c : report.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    Json parties = Json::array();
    if (report.proposer) parties.push_back(report.proposer->str());
    if (report.confirmer) parties.push_back(report.confirmer->str());
    return Json{{"verdict", report.valid() ? "Valid" : "Invalid"},
                {"checks", checks},
                {"agreed_entries", expressions_to_json(report.agreed_entries)},
                {"parties", parties},
                {"last_signer", report.last_signer ? report.last_signer->str() : ""}};
}

}  // namespace ssla
