#pragma once

#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ssla/error.hpp"
#include "ssla/messages.hpp"
#include "ssla/protocol.hpp"
#include "ssla/runtime.hpp"
#include "ssla/translation.hpp"

namespace httplib {
class Server;
}

namespace ssla {

struct Request {
    std::string method;
    std::string path;
    std::string body;
};

struct Response {
    int status = 200;
    std::string body;
    /// Set on 201 responses.
    std::string location;
};

class Handler {
public:
    virtual ~Handler() = default;
    virtual Response handle(const Request& request) = 0;
};

class Transport {
public:
    virtual ~Transport() = default;
    /// Throws Error(Transport) when the peer cannot be reached.
    virtual Response send(const Request& request) = 0;
};

/// In-process transport: hands the request bytes straight to a handler.
class LoopbackTransport final : public Transport {
public:
    explicit LoopbackTransport(std::shared_ptr<Handler> target) : target_(std::move(target)) {}
    Response send(const Request& request) override { return target_->handle(request); }

private:
    std::shared_ptr<Handler> target_;
};

/// HTTP/1.1 client for `http://host:port`.
class HttpTransport final : public Transport {
public:
    explicit HttpTransport(std::string base_url);
    Response send(const Request& request) override;

private:
    std::string base_url_;
};

/// Serves one handler over HTTP on a background thread.
class HttpServer {
public:
    explicit HttpServer(std::shared_ptr<Handler> handler);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds and starts serving; port 0 picks a free port. Returns the port.
    /// Throws Error(Transport) if the socket cannot be bound.
    int start(const std::string& host, int port);
    /// Blocks until stop() is called from another thread or a signal handler.
    void wait();
    void stop();

private:
    std::shared_ptr<Handler> handler_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

int http_status(ErrorCode code) noexcept;
/// `{"detail": ..., "error": <code name>}` with the mapped status.
Response error_response(const Error& e);
/// Rethrows the error carried by a non-2xx response.
[[noreturn]] void raise_from(const Response& response);

/// POST /translate, GET /dictionaries/<dimension>. Stateless.
class KbService final : public Handler {
public:
    explicit KbService(std::shared_ptr<const KnowledgeBase> kb, std::optional<PrivateKey> integrity_key = std::nullopt);
    Response handle(const Request& request) override;

private:
    std::shared_ptr<const KnowledgeBase> kb_;
    std::optional<PrivateKey> integrity_key_;
};

/// POST /negotiations (round-one proposal), POST /negotiations/<id>,
/// GET /negotiations/<id>, GET /identity.
class NegotiationService final : public Handler {
public:
    explicit NegotiationService(std::shared_ptr<Agent> agent) : agent_(std::move(agent)) {}
    Response handle(const Request& request) override;

private:
    Response deliver(const Message& msg);

    std::shared_ptr<Agent> agent_;
};

std::string negotiation_path(const NegotiationId& id);

/// Translator backed by a remote KbService.
class RemoteKb final : public Translator {
public:
    RemoteKb(std::shared_ptr<Transport> transport, std::shared_ptr<RandomSource> rng,
             std::optional<PublicKey> integrity_key = std::nullopt);

    TranslationResult translate(const SecurityExpression& expr, Dimension goal) const override;
    Dictionary dictionary(Dimension d) const;

private:
    std::shared_ptr<Transport> transport_;
    std::shared_ptr<RandomSource> rng_;
    std::optional<PublicKey> integrity_key_;
};

/// Drives `initiator` against a remote NegotiationService, starting with
/// `first`, until neither side has anything more to send. Every message that
/// crossed the transport is appended to `trace` in order.
NegotiationId run_initiator(Agent& initiator, Transport& transport, const SslaProposal& first,
                            std::vector<Message>* trace = nullptr);

}  // namespace ssla
