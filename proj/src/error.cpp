#include "ssla/error.hpp"

namespace ssla {

std::string_view code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Syntax: return "SyntaxError";
        case ErrorCode::DimensionOrder: return "DimensionOrderError";
        case ErrorCode::Format: return "FormatError";
        case ErrorCode::DuplicateOid: return "DuplicateOidError";
        case ErrorCode::DimensionMismatch: return "DimensionMismatchError";
        case ErrorCode::UnknownOid: return "UnknownOid";
        case ErrorCode::MalformedKey: return "MalformedKey";
        case ErrorCode::UnsupportedAlgorithm: return "UnsupportedAlgorithm";
        case ErrorCode::MalformedMessage: return "MalformedMessage";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::InvalidSignature: return "InvalidSignature";
        case ErrorCode::IdentityMismatch: return "IdentityMismatch";
        case ErrorCode::InvalidPow: return "InvalidPow";
        case ErrorCode::ReplayedNonce: return "ReplayedNonce";
        case ErrorCode::StaleTimestamp: return "StaleTimestamp";
        case ErrorCode::StateViolation: return "StateViolation";
        case ErrorCode::UnknownNegotiation: return "UnknownNegotiation";
        case ErrorCode::MismatchedEmbedding: return "MismatchedEmbedding";
        case ErrorCode::Config: return "ConfigError";
        case ErrorCode::Transport: return "TransportError";
    }
    return "Unknown";
}

std::optional<ErrorCode> parse_code_name(std::string_view name) noexcept {
    for (int i = 0; i <= static_cast<int>(ErrorCode::Transport); ++i) {
        auto code = static_cast<ErrorCode>(i);
        if (code_name(code) == name) return code;
    }
    return std::nullopt;
}

}  // namespace ssla
