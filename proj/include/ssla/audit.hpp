#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssla/crypto.hpp"
#include "ssla/messages.hpp"

namespace ssla {

struct AuditCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct AuditReport {
    enum class Verdict { Valid, Invalid };

    Verdict verdict = Verdict::Invalid;
    std::vector<AuditCheck> checks;
    ExpressionSet agreed_entries{ExpressionRole::SslaEntry};
    std::optional<PartyIdentity> proposer;
    std::optional<PartyIdentity> confirmer;
    /// The party whose signature completed the agreement (the confirmer).
    std::optional<PartyIdentity> last_signer;

    bool valid() const noexcept { return verdict == Verdict::Valid; }
    const AuditCheck* find(std::string_view name) const;
};

struct AuditOptions {
    /// Minimum difficulty the round-one stamp must claim.
    int min_pow_bits = 0;
};

/// Verifies a record from its own contents and the parties' public keys.
/// Needs no network and no knowledge base. Every check runs; the verdict is
/// Valid iff all of them pass. A party without a supplied key fails the
/// checks that need it, naming the signature that could not be verified.
AuditReport audit_record(const SslaRecord& record, const std::vector<PublicKey>& keys, AuditOptions options = {});

/// Same, starting from the stored bytes. Text that does not decode yields an
/// Invalid report with a failed `record.decode` check.
AuditReport audit_record_text(std::string_view text, const std::vector<PublicKey>& keys, AuditOptions options = {});

/// True iff both records serialize to identical canonical bytes.
bool compare_evidence(const SslaRecord& a, const SslaRecord& b);

std::string format_report(const AuditReport& report);
Json report_to_json(const AuditReport& report);

}  // namespace ssla
