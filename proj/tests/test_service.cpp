#include <doctest.h>

#include "ssla/error.hpp"
#include "ssla/service.hpp"
#include "support.hpp"

using namespace testing;

namespace {

std::string translate_body(const std::vector<std::string>& items, Dimension goal, std::uint8_t nonce = 1) {
    return to_document(TranslationRequest{reqs(items), goal, Bytes(16, nonce)}).canonical();
}

ErrorCode error_code(const Response& r) {
    auto j = parse_json(r.body);
    return *parse_code_name(j.at("error").get<std::string>());
}

/// Answers with a fixed response, for client-side checks.
class CannedHandler final : public Handler {
public:
    explicit CannedHandler(Response r) : r_(std::move(r)) {}
    Response handle(const Request&) override { return r_; }

private:
    Response r_;
};

}  // namespace

TEST_SUITE("service") {

TEST_CASE("status mapping") {
    CHECK(http_status(ErrorCode::MalformedMessage) == 400);
    CHECK(http_status(ErrorCode::InvalidSignature) == 401);
    CHECK(http_status(ErrorCode::IdentityMismatch) == 401);
    CHECK(http_status(ErrorCode::InvalidPow) == 403);
    CHECK(http_status(ErrorCode::UnknownNegotiation) == 404);
    CHECK(http_status(ErrorCode::UnknownOid) == 404);
    CHECK(http_status(ErrorCode::ReplayedNonce) == 409);
    CHECK(http_status(ErrorCode::StateViolation) == 409);
    CHECK(http_status(ErrorCode::StaleTimestamp) == 422);
    auto r = error_response(ProtocolError(ErrorCode::InvalidPow, "too little work"));
    CHECK(r.status == 403);
    CHECK(error_code(r) == ErrorCode::InvalidPow);
    try {
        raise_from(r);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidPow);
    }
}

TEST_CASE("kb service translates and reports per item") {
    auto svc = std::make_shared<KbService>(seed_kb());
    auto r = svc->handle({"POST", "/translate", translate_body({"Risk.1.1.1", "Risk.9.9"}, Dimension::Function)});
    REQUIRE(r.status == 200);
    auto reply = translation_reply_from(WireDocument::parse(r.body));
    CHECK(reply.nonce == Bytes(16, 1));
    REQUIRE(reply.results.size() == 2);
    CHECK(strings_of(reply.results[0].result->output) ==
          std::vector<std::string>{"Function.12.1.3", "Function.17", "Function.23.3"});
    CHECK(reply.results[1].error.has_value());
    CHECK_FALSE(reply.signature);
}

TEST_CASE("kb service passthrough") {
    auto svc = std::make_shared<KbService>(seed_kb());
    auto r = svc->handle({"POST", "/translate", translate_body({"Function.15"}, Dimension::Technique)});
    auto reply = translation_reply_from(WireDocument::parse(r.body));
    CHECK(reply.results[0].result->passthrough);
    CHECK(strings_of(reply.results[0].result->output) == std::vector<std::string>{"Function.15"});
}

TEST_CASE("kb service input errors") {
    auto svc = std::make_shared<KbService>(seed_kb());
    CHECK(svc->handle({"POST", "/translate", "{"}).status == 400);
    CHECK(error_code(svc->handle({"POST", "/translate", "{"})) == ErrorCode::MalformedMessage);
    auto v2 = svc->handle({"POST", "/translate", R"({"type":"TranslationRequest","version":"9","body":{}})"});
    CHECK(error_code(v2) == ErrorCode::UnsupportedVersion);
    CHECK(svc->handle({"GET", "/nothing", ""}).status == 404);
    CHECK(svc->handle({"GET", "/dictionaries/Policy", ""}).status >= 400);
}

TEST_CASE("dictionary endpoint") {
    auto svc = std::make_shared<KbService>(seed_kb());
    auto r = svc->handle({"GET", "/dictionaries/Technique", ""});
    REQUIRE(r.status == 200);
    auto doc = WireDocument::parse(r.body);
    CHECK(doc.type == "Dictionary");
    CHECK(doc.body.at("dimension") == "Technique");
    bool skey = false;
    for (const auto& e : doc.body.at("entries")) skey = skey || (e.at("oid") == "Technique.7.2" && e.at("label") == "S/Key");
    CHECK(skey);
}

TEST_CASE("remote kb over loopback equals the local kb") {
    auto transport = std::make_shared<LoopbackTransport>(std::make_shared<KbService>(seed_kb()));
    RemoteKb remote(transport, std::make_shared<SeededRandom>(1));
    for (const auto* e : {"Risk.1.1.1", "Target.1.1.2", "Technique.7.2", "Function.15", "Risk.1.1.2:Function.19.12.2"}) {
        for (auto goal : kAllDimensions) {
            CAPTURE(e);
            auto a = remote.translate(X(e), goal);
            auto b = seed_kb()->translate(X(e), goal);
            CHECK(a.output == b.output);
            CHECK(a.passthrough == b.passthrough);
        }
    }
    CHECK_THROWS_AS(remote.translate(X("Risk.9.9"), Dimension::Function), UnknownOidError);
    CHECK(remote.dictionary(Dimension::Risk).label(Oid::parse("Risk.1.1.1")) == "network sniffing");
}

TEST_CASE("integrity mode") {
    auto signer = party_key("sp");
    auto transport = std::make_shared<LoopbackTransport>(std::make_shared<KbService>(seed_kb(), signer));
    RemoteKb trusting(transport, std::make_shared<SeededRandom>(2), signer.public_key());
    CHECK(trusting.translate(X("Risk.1.1.1"), Dimension::Function).output.size() == 3);
    RemoteKb wrong(transport, std::make_shared<SeededRandom>(2), party_key("user").public_key());
    CHECK_THROWS_AS(wrong.translate(X("Risk.1.1.1"), Dimension::Function), Error);

    // an unsigned server is refused when a signature is expected
    auto plain = std::make_shared<LoopbackTransport>(std::make_shared<KbService>(seed_kb()));
    RemoteKb strict(plain, std::make_shared<SeededRandom>(2), signer.public_key());
    CHECK_THROWS_AS(strict.translate(X("Risk.1.1.1"), Dimension::Function), Error);
}

TEST_CASE("remote kb rejects a reply for another query") {
    TranslationReply reply;
    reply.nonce = Bytes(16, 0xaa);
    reply.results = translate_set(*seed_kb(), reqs({"Risk.1.1.1"}), Dimension::Function);
    auto canned = std::make_shared<LoopbackTransport>(
        std::make_shared<CannedHandler>(Response{200, to_document(reply).canonical(), ""}));
    RemoteKb remote(canned, std::make_shared<SeededRandom>(3));
    // nonce echo does not match the request
    CHECK_THROWS_AS(remote.translate(X("Risk.1.1.1"), Dimension::Function), Error);
}

TEST_CASE("negotiation service over loopback") {
    auto pair = scenario_pair(41);
    auto svc = std::make_shared<NegotiationService>(pair.sp);
    LoopbackTransport transport(svc);

    auto id_doc = WireDocument::parse(svc->handle({"GET", "/identity", ""}).body);
    CHECK(id_doc.type == "Identity");
    CHECK(id_doc.body.at("identity") == pair.sp->identity().str());

    auto first = pair.user->initiate(pair.sp->identity(), user_function_reqs(), user_caps());
    auto created = svc->handle({"POST", "/negotiations", encode_message(first)});
    CHECK(created.status == 201);
    // the id is the sha256 of the round-one stamp text
    CHECK(created.location == "/negotiations/" + to_hex(sha256(as_bytes(first.pow->str()))));
    auto counter = decode_message(created.body);
    CHECK(std::holds_alternative<SslaProposal>(counter));

    auto st = WireDocument::parse(svc->handle({"GET", created.location, ""}).body);
    CHECK(st.body.at("phase") == "ProposalSent");
    CHECK(st.body.at("round") == 2);

    auto conf = pair.user->receive(counter);
    REQUIRE(conf);
    auto done = svc->handle({"POST", created.location, encode_message(*conf)});
    CHECK(done.status == 204);
    st = WireDocument::parse(svc->handle({"GET", created.location, ""}).body);
    CHECK(st.body.at("phase") == "Agreed");

    SUBCASE("replays map to 409") {
        auto again = svc->handle({"POST", created.location, encode_message(*conf)});
        CHECK(again.status == 409);
        CHECK(error_code(again) == ErrorCode::ReplayedNonce);
    }
    SUBCASE("unknown negotiation") {
        auto r = svc->handle({"GET", "/negotiations/" + std::string(64, '0'), ""});
        CHECK(r.status == 404);
        CHECK(error_code(r) == ErrorCode::UnknownNegotiation);
    }
    SUBCASE("message under the wrong path") {
        auto r = svc->handle({"POST", "/negotiations/" + std::string(64, '0'), encode_message(*conf)});
        CHECK(r.status >= 400);
    }
    SUBCASE("only round one opens") {
        auto r = svc->handle({"POST", "/negotiations", encode_message(counter)});
        CHECK(r.status == 409);
    }
}

TEST_CASE("run_initiator over loopback") {
    auto pair = scenario_pair(42);
    LoopbackTransport transport(std::make_shared<NegotiationService>(pair.sp));
    auto first = pair.user->initiate(pair.sp->identity(), user_function_reqs(), user_caps());
    std::vector<Message> trace;
    auto id = run_initiator(*pair.user, transport, first, &trace);
    CHECK(id == first.negotiation_id);
    CHECK(trace.size() == 3);
    CHECK(pair.user->state(id)->phase == Phase::Agreed);
    CHECK(pair.sp->state(id)->phase == Phase::Agreed);
}

TEST_CASE("real http on an ephemeral port") {
    auto pair = scenario_pair(43);
    HttpServer sp_server(std::make_shared<NegotiationService>(pair.sp));
    const int port = sp_server.start("127.0.0.1", 0);
    REQUIRE(port > 0);
    HttpServer kb_server(std::make_shared<KbService>(seed_kb(), party_key("sp")));
    const int kb_port = kb_server.start("127.0.0.1", 0);

    HttpTransport transport("http://127.0.0.1:" + std::to_string(port));
    auto first = pair.user->initiate(pair.sp->identity(), user_function_reqs(), user_caps());
    auto id = run_initiator(*pair.user, transport, first);
    CHECK(pair.user->state(id)->phase == Phase::Agreed);
    CHECK(encode_record(*pair.user->record(id)) == encode_record(*pair.sp->record(id)));

    RemoteKb remote(std::make_shared<HttpTransport>("http://127.0.0.1:" + std::to_string(kb_port)),
                    std::make_shared<SeededRandom>(4), party_key("sp").public_key());
    CHECK(strings_of(remote.translate(X("Technique.7.2"), Dimension::Function).output) ==
          std::vector<std::string>{"Function.17"});

    auto bad = transport.send({"POST", "/negotiations", "not json"});
    CHECK(bad.status == 400);
    sp_server.stop();
    kb_server.stop();

    HttpTransport dead("http://127.0.0.1:" + std::to_string(port));
    try {
        dead.send({"GET", "/identity", ""});
        FAIL("reached a stopped server");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Transport);
    }
}

}  // TEST_SUITE
