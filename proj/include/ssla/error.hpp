#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ssla {

/// Stable machine-readable error codes. The string names returned by
/// `code_name` appear on the wire and in CLI output; never renumber or rename.
enum class ErrorCode {
    Syntax,
    DimensionOrder,
    Format,
    DuplicateOid,
    DimensionMismatch,
    UnknownOid,
    MalformedKey,
    UnsupportedAlgorithm,
    MalformedMessage,
    UnsupportedVersion,
    InvalidSignature,
    IdentityMismatch,
    InvalidPow,
    ReplayedNonce,
    StaleTimestamp,
    StateViolation,
    UnknownNegotiation,
    MismatchedEmbedding,
    Config,
    Transport,
};

std::string_view code_name(ErrorCode code) noexcept;
/// Inverse of code_name.
std::optional<ErrorCode> parse_code_name(std::string_view name) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Narrower types for the places where callers want to catch one family only.

class SyntaxError : public Error {
public:
    explicit SyntaxError(const std::string& what) : Error(ErrorCode::Syntax, what) {}
};

class DimensionOrderError : public Error {
public:
    explicit DimensionOrderError(const std::string& what) : Error(ErrorCode::DimensionOrder, what) {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(ErrorCode::Format, what) {}
};

class UnknownOidError : public Error {
public:
    explicit UnknownOidError(const std::string& what) : Error(ErrorCode::UnknownOid, what) {}
};

class MalformedKeyError : public Error {
public:
    explicit MalformedKeyError(const std::string& what) : Error(ErrorCode::MalformedKey, what) {}
};

/// Raised by the negotiation layer. A ProtocolError never leaves a partial
/// state change behind.
class ProtocolError : public Error {
public:
    using Error::Error;
};

}  // namespace ssla
