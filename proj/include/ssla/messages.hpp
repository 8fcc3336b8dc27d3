#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ssla/crypto.hpp"
#include "ssla/document.hpp"
#include "ssla/expression.hpp"
#include "ssla/hashcash.hpp"
#include "ssla/translation.hpp"

namespace ssla {

// Negotiation messages. Every signed message carries the sender's DER public
// key; its SHA-256 must equal the sender identity. A signature covers the
// canonical document of the message with `body.signature` removed.

struct SslaProposal {
    NegotiationId negotiation_id;
    int round = 1;
    ExpressionSet requirements{ExpressionRole::Requirement};
    ExpressionSet capabilities{ExpressionRole::Capability};
    /// Sender of this proposal. Roles swap on every counter round.
    PartyIdentity proposer;
    PartyIdentity responder;
    Bytes sender_key;
    Bytes nonce;
    std::int64_t timestamp = 0;
    std::optional<std::string> kb_uri;
    std::optional<HashcashStamp> pow;
    Signature signature;

    friend bool operator==(const SslaProposal&, const SslaProposal&) = default;
};

struct SslaConfirmation {
    NegotiationId negotiation_id;
    PartyIdentity confirmer;
    Bytes sender_key;
    /// The confirmed proposal exactly as received, signature included.
    SslaProposal proposal;
    Bytes nonce;
    std::int64_t timestamp = 0;
    Signature signature;

    friend bool operator==(const SslaConfirmation&, const SslaConfirmation&) = default;
};

struct CancelMessage {
    NegotiationId negotiation_id;
    PartyIdentity sender;
    Bytes sender_key;
    int round = 0;
    std::string reason;
    Bytes nonce;
    std::int64_t timestamp = 0;
    Signature signature;

    friend bool operator==(const CancelMessage&, const CancelMessage&) = default;
};

using Message = std::variant<SslaProposal, SslaConfirmation, CancelMessage>;

std::string_view message_type(const Message& msg) noexcept;
const NegotiationId& negotiation_of(const Message& msg) noexcept;
const PartyIdentity& sender_of(const Message& msg) noexcept;
const Bytes& nonce_of(const Message& msg) noexcept;
std::int64_t timestamp_of(const Message& msg) noexcept;

WireDocument to_document(const Message& msg, bool with_signature = true);
/// Strict decoding: unknown fields, non-canonical encodings and duplicate
/// expressions are all Error(MalformedMessage).
Message message_from_document(const WireDocument& doc);
std::string encode_message(const Message& msg);
Message decode_message(std::string_view text);

/// The exact bytes a signature covers.
Bytes signing_bytes(const Message& msg);
/// Fills in sender_key and signature.
void sign_message(Message& msg, const PrivateKey& key);
/// Checks the key/identity binding and the signature (and, for a
/// confirmation, the embedded proposal's signature as well). Throws
/// ProtocolError with IdentityMismatch or InvalidSignature.
void authenticate(const Message& msg);

struct TranslationRequest {
    ExpressionSet expressions;
    Dimension goal = Dimension::Function;
    Bytes nonce;
};

struct TranslationReply {
    Bytes nonce;
    std::vector<TranslationOutcome> results;
    /// Present only when the KB runs in integrity mode.
    std::optional<Bytes> sender_key;
    std::optional<Signature> signature;
};

WireDocument to_document(const TranslationRequest& req);
TranslationRequest translation_request_from(const WireDocument& doc);
WireDocument to_document(const TranslationReply& reply, bool with_signature = true);
TranslationReply translation_reply_from(const WireDocument& doc);
void sign_reply(TranslationReply& reply, const PrivateKey& key);
bool verify_reply(const TranslationReply& reply, const PublicKey& expected_signer);

/// The dual-signed agreement both parties keep as evidence.
struct SslaRecord {
    NegotiationId negotiation_id;
    ExpressionSet agreed_entries{ExpressionRole::SslaEntry};
    PartyIdentity proposal_signer;
    Signature proposal_signature;
    PartyIdentity confirmation_signer;
    Signature confirmation_signature;
    SslaConfirmation confirmation;
    /// Every signed message of the negotiation in sending order; the last one
    /// is `confirmation`.
    std::vector<Message> transcript;

    friend bool operator==(const SslaRecord&, const SslaRecord&) = default;
};

WireDocument to_document(const SslaRecord& record);
SslaRecord record_from_document(const WireDocument& doc);
std::string encode_record(const SslaRecord& record);
SslaRecord decode_record(std::string_view text);

/// Canonical wire form of an expression list.
Json expressions_to_json(const ExpressionSet& set);
ExpressionSet expressions_from_json(const Json& list, ExpressionRole role);

}  // namespace ssla
