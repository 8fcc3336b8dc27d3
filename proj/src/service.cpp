#include "ssla/service.hpp"

#include <httplib.h>

namespace ssla {

namespace {

constexpr std::string_view kNegotiations = "/negotiations";

Response document_response(int status, const WireDocument& doc) { return {status, doc.canonical(), {}}; }

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

}  // namespace

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Syntax:
        case ErrorCode::DimensionOrder:
        case ErrorCode::Format:
        case ErrorCode::DuplicateOid:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::MalformedKey:
        case ErrorCode::UnsupportedAlgorithm:
        case ErrorCode::MalformedMessage:
        case ErrorCode::UnsupportedVersion:
            return 400;
        case ErrorCode::InvalidSignature:
        case ErrorCode::IdentityMismatch:
            return 401;
        case ErrorCode::InvalidPow:
            return 403;
        case ErrorCode::UnknownOid:
        case ErrorCode::UnknownNegotiation:
            return 404;
        case ErrorCode::ReplayedNonce:
        case ErrorCode::StateViolation:
        case ErrorCode::MismatchedEmbedding:
            return 409;
        case ErrorCode::StaleTimestamp:
            return 422;
        case ErrorCode::Config:
        case ErrorCode::Transport:
            return 500;
    }
    return 500;
}

Response error_response(const Error& e) {
    Json body{{"error", std::string(code_name(e.code()))}, {"detail", std::string(e.what())}};
    return {http_status(e.code()), canonical_dump(body), {}};
}

void raise_from(const Response& response) {
    ErrorCode code = ErrorCode::Transport;
    std::string detail = "HTTP " + std::to_string(response.status);
    try {
        auto body = Json::parse(response.body);
        if (auto parsed = parse_code_name(body.at("error").get<std::string>())) code = *parsed;
        detail = body.at("detail").get<std::string>();
    } catch (const Json::exception&) {
    }
    throw ProtocolError(code, detail);
}

// --- HTTP plumbing --------------------------------------------------------

HttpTransport::HttpTransport(std::string base_url) : base_url_(std::move(base_url)) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

Response HttpTransport::send(const Request& request) {
    httplib::Client client(base_url_);
    client.set_connection_timeout(5);
    client.set_read_timeout(30);
    httplib::Result result = request.method == "GET"
                                 ? client.Get(request.path)
                                 : client.Post(request.path, request.body, "application/json");
    if (!result) {
        throw Error(ErrorCode::Transport,
                    "cannot reach " + base_url_ + request.path + ": " + httplib::to_string(result.error()));
    }
    return {result->status, result->body, result->get_header_value("Location")};
}

HttpServer::HttpServer(std::shared_ptr<Handler> handler)
    : handler_(std::move(handler)), server_(std::make_unique<httplib::Server>()) {
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
        Response out;
        try {
            out = handler_->handle({req.method, req.path, req.body});
        } catch (const Error& e) {
            out = error_response(e);
        } catch (const std::exception& e) {
            out = error_response(Error(ErrorCode::Transport, e.what()));
        }
        res.status = out.status;
        if (!out.location.empty()) res.set_header("Location", out.location);
        if (!out.body.empty()) res.set_content(out.body, "application/json");
    };
    server_->Get(R"(/.*)", route);
    server_->Post(R"(/.*)", route);
}

HttpServer::~HttpServer() {
    stop();
    if (thread_.joinable()) thread_.join();
}

int HttpServer::start(const std::string& host, int port) {
    int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound <= 0) throw Error(ErrorCode::Transport, "cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    return bound;
}

void HttpServer::wait() {
    if (thread_.joinable()) thread_.join();
}

void HttpServer::stop() {
    if (server_) server_->stop();
}

// --- KB service -----------------------------------------------------------

KbService::KbService(std::shared_ptr<const KnowledgeBase> kb, std::optional<PrivateKey> integrity_key)
    : kb_(std::move(kb)), integrity_key_(std::move(integrity_key)) {}

Response KbService::handle(const Request& request) {
    try {
        if (request.method == "POST" && request.path == "/translate") {
            auto req = translation_request_from(WireDocument::parse(request.body));
            TranslationReply reply;
            reply.nonce = req.nonce;
            reply.results = translate_set(*kb_, req.expressions, req.goal);
            if (integrity_key_) sign_reply(reply, *integrity_key_);
            return document_response(200, to_document(reply));
        }
        constexpr std::string_view dicts = "/dictionaries/";
        if (request.method == "GET" && starts_with(request.path, dicts)) {
            auto dim = try_parse_dimension(std::string_view(request.path).substr(dicts.size()));
            if (!dim) return error_response(Error(ErrorCode::UnknownOid, "no dimension " + request.path));
            const auto& dict = kb_->dictionary(*dim);
            Json entries = Json::array();
            for (const auto& [oid, label] : dict.entries()) entries.push_back({{"oid", oid.str()}, {"label", label}});
            Json body{{"dimension", std::string(dimension_name(*dim))}, {"entries", entries}};
            if (dict.arc_prefix()) body["arc_prefix"] = *dict.arc_prefix();
            return document_response(200, {"Dictionary", body});
        }
    } catch (const Error& e) {
        auto code = e.code() == ErrorCode::UnsupportedVersion ? e.code() : ErrorCode::MalformedMessage;
        return error_response(Error(code, e.what()));
    }
    return {404, canonical_dump(Json{{"error", "NotFound"}, {"detail", request.method + " " + request.path}}), {}};
}

// --- negotiation service --------------------------------------------------

std::string negotiation_path(const NegotiationId& id) { return std::string(kNegotiations) + "/" + id.hex(); }

Response NegotiationService::deliver(const Message& msg) {
    auto reply = agent_->receive(msg);
    if (!reply) return {204, {}, {}};
    return {200, encode_message(*reply), {}};
}

Response NegotiationService::handle(const Request& request) {
    try {
        if (request.method == "GET" && request.path == "/identity") {
            Json body{{"identity", agent_->identity().str()},
                      {"public_key", base64_encode(agent_->public_key().der())}};
            return document_response(200, {"Identity", body});
        }
        if (request.method == "POST" && request.path == kNegotiations) {
            auto msg = decode_message(request.body);
            const auto* p = std::get_if<SslaProposal>(&msg);
            if (p == nullptr || p->round != 1) {
                throw ProtocolError(ErrorCode::StateViolation, "only a round-one proposal creates a negotiation");
            }
            auto out = deliver(msg);
            out.status = 201;
            out.location = negotiation_path(p->negotiation_id);
            return out;
        }
        if (starts_with(request.path, std::string(kNegotiations) + "/")) {
            auto hex = std::string_view(request.path).substr(kNegotiations.size() + 1);
            NegotiationId id;
            try {
                id = NegotiationId::parse(hex);
            } catch (const Error&) {
                throw ProtocolError(ErrorCode::UnknownNegotiation, "no negotiation " + std::string(hex));
            }
            if (request.method == "GET") {
                auto state = agent_->state(id);
                if (!state) throw ProtocolError(ErrorCode::UnknownNegotiation, "no negotiation " + id.hex());
                Json body{{"negotiation_id", id.hex()},
                          {"phase", std::string(phase_name(state->phase))},
                          {"round", state->round}};
                return document_response(200, {"NegotiationState", body});
            }
            if (request.method == "POST") {
                if (!agent_->state(id)) throw ProtocolError(ErrorCode::UnknownNegotiation, "no negotiation " + id.hex());
                auto msg = decode_message(request.body);
                if (negotiation_of(msg) != id) {
                    throw ProtocolError(ErrorCode::StateViolation, "message belongs to another negotiation");
                }
                return deliver(msg);
            }
        }
    } catch (const Error& e) {
        return error_response(e);
    }
    return {404, canonical_dump(Json{{"error", "NotFound"}, {"detail", request.method + " " + request.path}}), {}};
}

// --- clients --------------------------------------------------------------

RemoteKb::RemoteKb(std::shared_ptr<Transport> transport, std::shared_ptr<RandomSource> rng,
                   std::optional<PublicKey> integrity_key)
    : transport_(std::move(transport)), rng_(std::move(rng)), integrity_key_(std::move(integrity_key)) {}

TranslationResult RemoteKb::translate(const SecurityExpression& expr, Dimension goal) const {
    TranslationRequest req;
    req.expressions.insert(expr);
    req.goal = goal;
    req.nonce = rng_->bytes(16);
    auto response = transport_->send({"POST", "/translate", to_document(req).canonical()});
    if (response.status != 200) raise_from(response);

    auto reply = translation_reply_from(WireDocument::parse(response.body));
    if (reply.nonce != req.nonce) throw Error(ErrorCode::MalformedMessage, "translation reply echoes the wrong nonce");
    if (integrity_key_ && !verify_reply(reply, *integrity_key_)) {
        throw Error(ErrorCode::InvalidSignature, "translation reply is not signed by the expected KB");
    }
    if (reply.results.size() != 1 || reply.results.front().input != expr) {
        throw Error(ErrorCode::MalformedMessage, "translation reply does not answer the query");
    }
    auto& outcome = reply.results.front();
    if (outcome.error) throw UnknownOidError(*outcome.error);
    return *outcome.result;
}

Dictionary RemoteKb::dictionary(Dimension d) const {
    auto response = transport_->send({"GET", "/dictionaries/" + std::string(dimension_name(d)), {}});
    if (response.status != 200) raise_from(response);
    auto doc = WireDocument::parse(response.body);
    if (doc.type != "Dictionary") throw Error(ErrorCode::MalformedMessage, "expected a Dictionary document");
    return load_dictionary(doc.body.dump());
}

NegotiationId run_initiator(Agent& initiator, Transport& transport, const SslaProposal& first,
                            std::vector<Message>* trace) {
    auto note = [&](const Message& m) {
        if (trace != nullptr) trace->push_back(m);
    };
    note(first);
    auto response = transport.send({"POST", std::string(kNegotiations), encode_message(first)});
    if (response.status != 201) raise_from(response);
    const auto path = response.location.empty() ? negotiation_path(first.negotiation_id) : response.location;

    while (response.status != 204 && !response.body.empty()) {
        auto incoming = decode_message(response.body);
        note(incoming);
        auto outgoing = initiator.receive(incoming);
        if (!outgoing) break;
        note(*outgoing);
        response = transport.send({"POST", path, encode_message(*outgoing)});
        if (response.status != 200 && response.status != 204) raise_from(response);
    }
    return first.negotiation_id;
}

}  // namespace ssla
