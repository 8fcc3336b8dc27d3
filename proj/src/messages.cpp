#include "ssla/messages.hpp"

#include "ssla/error.hpp"

namespace ssla {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedMessage, what); }

const std::string& get_string(const Json& obj, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_string()) malformed(std::string("field '") + key + "' must be a string");
    return v.get_ref<const std::string&>();
}

std::int64_t get_int(const Json& obj, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) malformed(std::string("field '") + key + "' must be an integer");
    return v.get<std::int64_t>();
}

int get_small_int(const Json& obj, const char* key) {
    auto v = get_int(obj, key);
    if (v < 0 || v > 1'000'000) malformed(std::string("field '") + key + "' out of range");
    return static_cast<int>(v);
}

Json signature_json(const Signature& sig) {
    return Json{{"alg", sig.algorithm}, {"value", base64_encode(sig.bytes)}};
}

Signature signature_from(const Json& j) {
    expect_keys(j, {"alg", "value"});
    return {get_string(j, "alg"), base64_decode(get_string(j, "value"))};
}

Bytes nonce_from(const Json& obj, const char* key) {
    auto bytes = from_hex(get_string(obj, key));
    if (bytes.empty()) malformed("empty nonce");
    return bytes;
}

/// Runs a decoder, folding every lower-level failure into MalformedMessage.
template <typename F>
auto strict(F&& decode) -> decltype(decode()) {
    try {
        return decode();
    } catch (const Json::exception& e) {
        malformed(e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MalformedMessage || e.code() == ErrorCode::UnsupportedVersion) throw;
        malformed(e.what());
    }
}

Json proposal_body(const SslaProposal& p, bool with_signature) {
    Json body{
        {"negotiation_id", p.negotiation_id.hex()},
        {"round", p.round},
        {"requirements", expressions_to_json(p.requirements)},
        {"capabilities", expressions_to_json(p.capabilities)},
        {"proposer", p.proposer.str()},
        {"responder", p.responder.str()},
        {"sender_key", base64_encode(p.sender_key)},
        {"nonce", to_hex(p.nonce)},
        {"timestamp", p.timestamp},
    };
    if (p.kb_uri) body["kb_uri"] = *p.kb_uri;
    if (p.pow) body["pow"] = p.pow->str();
    if (with_signature) body["signature"] = signature_json(p.signature);
    return body;
}

SslaProposal proposal_from_body(const Json& body) {
    expect_keys(body,
                {"negotiation_id", "round", "requirements", "capabilities", "proposer", "responder", "sender_key",
                 "nonce", "timestamp", "signature"},
                {"kb_uri", "pow"});
    SslaProposal p;
    p.negotiation_id = NegotiationId::parse(get_string(body, "negotiation_id"));
    p.round = get_small_int(body, "round");
    if (p.round < 1) malformed("round must be at least 1");
    p.requirements = expressions_from_json(body.at("requirements"), ExpressionRole::Requirement);
    p.capabilities = expressions_from_json(body.at("capabilities"), ExpressionRole::Capability);
    p.proposer = PartyIdentity::parse(get_string(body, "proposer"));
    p.responder = PartyIdentity::parse(get_string(body, "responder"));
    p.sender_key = base64_decode(get_string(body, "sender_key"));
    p.nonce = nonce_from(body, "nonce");
    p.timestamp = get_int(body, "timestamp");
    if (body.contains("kb_uri")) p.kb_uri = get_string(body, "kb_uri");
    if (body.contains("pow")) p.pow = HashcashStamp::parse(get_string(body, "pow"));
    p.signature = signature_from(body.at("signature"));
    return p;
}

SslaProposal proposal_from_json(const Json& doc) {
    auto wire = WireDocument::from_json(doc);
    if (wire.type != "SslaProposal") malformed("expected an SslaProposal, got " + wire.type);
    return proposal_from_body(wire.body);
}

Json confirmation_body(const SslaConfirmation& c, bool with_signature) {
    Json body{
        {"negotiation_id", c.negotiation_id.hex()},
        {"confirmer", c.confirmer.str()},
        {"sender_key", base64_encode(c.sender_key)},
        {"proposal", to_document(Message{c.proposal}).to_json()},
        {"nonce", to_hex(c.nonce)},
        {"timestamp", c.timestamp},
    };
    if (with_signature) body["signature"] = signature_json(c.signature);
    return body;
}

SslaConfirmation confirmation_from_body(const Json& body) {
    expect_keys(body, {"negotiation_id", "confirmer", "sender_key", "proposal", "nonce", "timestamp", "signature"});
    SslaConfirmation c;
    c.negotiation_id = NegotiationId::parse(get_string(body, "negotiation_id"));
    c.confirmer = PartyIdentity::parse(get_string(body, "confirmer"));
    c.sender_key = base64_decode(get_string(body, "sender_key"));
    c.proposal = proposal_from_json(body.at("proposal"));
    c.nonce = nonce_from(body, "nonce");
    c.timestamp = get_int(body, "timestamp");
    c.signature = signature_from(body.at("signature"));
    return c;
}

Json cancel_body(const CancelMessage& m, bool with_signature) {
    Json body{
        {"negotiation_id", m.negotiation_id.hex()},
        {"sender", m.sender.str()},
        {"sender_key", base64_encode(m.sender_key)},
        {"round", m.round},
        {"reason", m.reason},
        {"nonce", to_hex(m.nonce)},
        {"timestamp", m.timestamp},
    };
    if (with_signature) body["signature"] = signature_json(m.signature);
    return body;
}

CancelMessage cancel_from_body(const Json& body) {
    expect_keys(body, {"negotiation_id", "sender", "sender_key", "round", "reason", "nonce", "timestamp", "signature"});
    CancelMessage m;
    m.negotiation_id = NegotiationId::parse(get_string(body, "negotiation_id"));
    m.sender = PartyIdentity::parse(get_string(body, "sender"));
    m.sender_key = base64_decode(get_string(body, "sender_key"));
    m.round = get_small_int(body, "round");
    m.reason = get_string(body, "reason");
    m.nonce = nonce_from(body, "nonce");
    m.timestamp = get_int(body, "timestamp");
    m.signature = signature_from(body.at("signature"));
    return m;
}

const Bytes& sender_key_of(const Message& msg) {
    return std::visit([](const auto& m) -> const Bytes& { return m.sender_key; }, msg);
}

const Signature& signature_of(const Message& msg) {
    return std::visit([](const auto& m) -> const Signature& { return m.signature; }, msg);
}

void check_signed_by_key(const Message& msg) {
    const auto& sender = sender_of(msg);
    std::optional<PublicKey> key;
    try {
        key = PublicKey::from_der(sender_key_of(msg));
    } catch (const MalformedKeyError& e) {
        throw ProtocolError(ErrorCode::InvalidSignature, std::string("unusable sender key: ") + e.what());
    }
    if (sender.binding != IdentityBinding::PublicKeyHash || derive_identity(*key) != sender) {
        throw ProtocolError(ErrorCode::IdentityMismatch, "sender key does not hash to " + sender.str());
    }
    bool ok = false;
    try {
        ok = verify(signing_bytes(msg), signature_of(msg), *key);
    } catch (const Error& e) {
        throw ProtocolError(ErrorCode::InvalidSignature, e.what());
    }
    if (!ok) {
        throw ProtocolError(ErrorCode::InvalidSignature,
                            std::string("bad signature on ") + std::string(message_type(msg)) + " from " + sender.str());
    }
}

Json outcome_json(const TranslationOutcome& o) {
    if (o.error) return Json{{"input", o.input.str()}, {"error", *o.error}};
    Json out = Json::array();
    for (const auto& e : o.result->output) out.push_back(e.str());
    return Json{{"input", o.input.str()}, {"output", out}, {"passthrough", o.result->passthrough}};
}

TranslationOutcome outcome_from(const Json& j) {
    auto input = parse_expression(get_string(j, "input"));
    if (j.contains("error")) {
        expect_keys(j, {"input", "error"});
        return {input, std::nullopt, get_string(j, "error")};
    }
    expect_keys(j, {"input", "output", "passthrough"});
    TranslationResult r{input, {}, false};
    for (const auto& e : j.at("output")) r.output.push_back(parse_expression(e.get<std::string>()));
    if (!j.at("passthrough").is_boolean()) malformed("passthrough must be a boolean");
    r.passthrough = j.at("passthrough").get<bool>();
    return {input, std::move(r), std::nullopt};
}

}  // namespace

Json expressions_to_json(const ExpressionSet& set) {
    Json out = Json::array();
    for (const auto& item : set) out.push_back(item.str());
    return out;
}

ExpressionSet expressions_from_json(const Json& list, ExpressionRole role) {
    if (!list.is_array()) malformed("expression list must be an array");
    ExpressionSet set(role);
    for (const auto& item : list) {
        if (!item.is_string()) malformed("expressions must be strings");
        auto expr = parse_expression(item.get<std::string>());
        if (expr.str() != item.get<std::string>()) malformed("non-canonical expression '" + item.get<std::string>() + "'");
        if (!set.insert(std::move(expr))) malformed("duplicate expression '" + item.get<std::string>() + "'");
    }
    return set;
}

std::string_view message_type(const Message& msg) noexcept {
    switch (msg.index()) {
        case 0: return "SslaProposal";
        case 1: return "SslaConfirmation";
        default: return "Cancel";
    }
}

const NegotiationId& negotiation_of(const Message& msg) noexcept {
    return std::visit([](const auto& m) -> const NegotiationId& { return m.negotiation_id; }, msg);
}

const PartyIdentity& sender_of(const Message& msg) noexcept {
    struct {
        const PartyIdentity& operator()(const SslaProposal& m) const { return m.proposer; }
        const PartyIdentity& operator()(const SslaConfirmation& m) const { return m.confirmer; }
        const PartyIdentity& operator()(const CancelMessage& m) const { return m.sender; }
    } pick;
    return std::visit(pick, msg);
}

const Bytes& nonce_of(const Message& msg) noexcept {
    return std::visit([](const auto& m) -> const Bytes& { return m.nonce; }, msg);
}

std::int64_t timestamp_of(const Message& msg) noexcept {
    return std::visit([](const auto& m) { return m.timestamp; }, msg);
}

WireDocument to_document(const Message& msg, bool with_signature) {
    struct {
        bool sig;
        WireDocument operator()(const SslaProposal& m) const { return {"SslaProposal", proposal_body(m, sig)}; }
        WireDocument operator()(const SslaConfirmation& m) const {
            return {"SslaConfirmation", confirmation_body(m, sig)};
        }
        WireDocument operator()(const CancelMessage& m) const { return {"Cancel", cancel_body(m, sig)}; }
    } encode{with_signature};
    return std::visit(encode, msg);
}

Message message_from_document(const WireDocument& doc) {
    return strict([&]() -> Message {
        if (doc.type == "SslaProposal") return proposal_from_body(doc.body);
        if (doc.type == "SslaConfirmation") return confirmation_from_body(doc.body);
        if (doc.type == "Cancel") return cancel_from_body(doc.body);
        malformed("unknown message type '" + doc.type + "'");
    });
}

std::string encode_message(const Message& msg) { return to_document(msg).canonical(); }

Message decode_message(std::string_view text) { return message_from_document(WireDocument::parse(text)); }

Bytes signing_bytes(const Message& msg) {
    auto text = to_document(msg, false).canonical();
    return Bytes(text.begin(), text.end());
}

void sign_message(Message& msg, const PrivateKey& key) {
    auto der = key.public_key().der();
    std::visit([&](auto& m) { m.sender_key = der; }, msg);
    auto sig = sign(signing_bytes(msg), key);
    std::visit([&](auto& m) { m.signature = sig; }, msg);
}

void authenticate(const Message& msg) {
    if (const auto* c = std::get_if<SslaConfirmation>(&msg)) check_signed_by_key(Message{c->proposal});
    check_signed_by_key(msg);
}

WireDocument to_document(const TranslationRequest& req) {
    return {"TranslationRequest",
            Json{{"expressions", expressions_to_json(req.expressions)},
                 {"goal", std::string(dimension_name(req.goal))},
                 {"nonce", to_hex(req.nonce)}}};
}

TranslationRequest translation_request_from(const WireDocument& doc) {
    return strict([&] {
        if (doc.type != "TranslationRequest") malformed("expected a TranslationRequest, got " + doc.type);
        expect_keys(doc.body, {"expressions", "goal", "nonce"});
        TranslationRequest req;
        req.expressions = expressions_from_json(doc.body.at("expressions"), ExpressionRole::Requirement);
        req.goal = parse_dimension(get_string(doc.body, "goal"));
        req.nonce = nonce_from(doc.body, "nonce");
        return req;
    });
}

WireDocument to_document(const TranslationReply& reply, bool with_signature) {
    Json results = Json::array();
    for (const auto& o : reply.results) results.push_back(outcome_json(o));
    Json body{{"nonce", to_hex(reply.nonce)}, {"results", results}};
    if (reply.sender_key) body["sender_key"] = base64_encode(*reply.sender_key);
    if (with_signature && reply.signature) body["signature"] = signature_json(*reply.signature);
    return {"TranslationReply", body};
}

TranslationReply translation_reply_from(const WireDocument& doc) {
    return strict([&] {
        if (doc.type != "TranslationReply") malformed("expected a TranslationReply, got " + doc.type);
        expect_keys(doc.body, {"nonce", "results"}, {"sender_key", "signature"});
        TranslationReply reply;
        reply.nonce = nonce_from(doc.body, "nonce");
        for (const auto& r : doc.body.at("results")) reply.results.push_back(outcome_from(r));
        if (doc.body.contains("sender_key")) reply.sender_key = base64_decode(get_string(doc.body, "sender_key"));
        if (doc.body.contains("signature")) reply.signature = signature_from(doc.body.at("signature"));
        return reply;
    });
}

void sign_reply(TranslationReply& reply, const PrivateKey& key) {
    reply.sender_key = key.public_key().der();
    reply.signature.reset();
    auto text = to_document(reply, false).canonical();
    reply.signature = sign(as_bytes(text), key);
}

bool verify_reply(const TranslationReply& reply, const PublicKey& expected_signer) {
    if (!reply.signature || !reply.sender_key || *reply.sender_key != expected_signer.der()) return false;
    auto text = to_document(reply, false).canonical();
    return verify(as_bytes(text), *reply.signature, expected_signer);
}

WireDocument to_document(const SslaRecord& record) {
    Json transcript = Json::array();
    for (const auto& m : record.transcript) transcript.push_back(to_document(m).to_json());
    return {"SslaRecord",
            Json{
                {"negotiation_id", record.negotiation_id.hex()},
                {"agreed_entries", expressions_to_json(record.agreed_entries)},
                {"proposal_signer", record.proposal_signer.str()},
                {"proposal_signature", signature_json(record.proposal_signature)},
                {"confirmation_signer", record.confirmation_signer.str()},
                {"confirmation_signature", signature_json(record.confirmation_signature)},
                {"confirmation", to_document(Message{record.confirmation}).to_json()},
                {"transcript", transcript},
            }};
}

SslaRecord record_from_document(const WireDocument& doc) {
    return strict([&] {
        if (doc.type != "SslaRecord") malformed("expected an SslaRecord, got " + doc.type);
        const auto& b = doc.body;
        expect_keys(b, {"negotiation_id", "agreed_entries", "proposal_signer", "proposal_signature",
                        "confirmation_signer", "confirmation_signature", "confirmation", "transcript"});
        SslaRecord r;
        r.negotiation_id = NegotiationId::parse(get_string(b, "negotiation_id"));
        r.agreed_entries = expressions_from_json(b.at("agreed_entries"), ExpressionRole::SslaEntry);
        r.proposal_signer = PartyIdentity::parse(get_string(b, "proposal_signer"));
        r.proposal_signature = signature_from(b.at("proposal_signature"));
        r.confirmation_signer = PartyIdentity::parse(get_string(b, "confirmation_signer"));
        r.confirmation_signature = signature_from(b.at("confirmation_signature"));
        auto conf = message_from_document(WireDocument::from_json(b.at("confirmation")));
        if (!std::holds_alternative<SslaConfirmation>(conf)) malformed("record confirmation has the wrong type");
        r.confirmation = std::get<SslaConfirmation>(std::move(conf));
        if (!b.at("transcript").is_array()) malformed("transcript must be an array");
        for (const auto& m : b.at("transcript")) r.transcript.push_back(message_from_document(WireDocument::from_json(m)));
        return r;
    });
}

std::string encode_record(const SslaRecord& record) { return to_document(record).canonical(); }

SslaRecord decode_record(std::string_view text) { return record_from_document(WireDocument::parse(text)); }

}  // namespace ssla
