#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>

#include "ssla/crypto.hpp"
#include "ssla/runtime.hpp"

namespace ssla {

/// Metadata carried in the hashcash extension field:
/// `init=<b64url id>;resp=<b64url id>;nonce=<b64url bytes>`.
/// Identities are the raw 32-byte public-key-hash digests.
struct StampExtension {
    PartyIdentity initiator;
    PartyIdentity responder;
    Bytes nonce;

    std::string encode() const;
    /// Throws FormatError.
    static StampExtension decode(std::string_view text);

    friend bool operator==(const StampExtension&, const StampExtension&) = default;
};

/// Hashcash v1 stamp, `ver:bits:date:resource:ext:rand:counter`, date as
/// UTC `YYMMDDhhmmss`, counter as lowercase hex.
struct HashcashStamp {
    int version = 1;
    int bits = 0;
    std::string date;
    std::string resource;
    std::string extension;
    std::string rand;
    std::string counter;

    std::string str() const;
    /// Throws FormatError on anything that is not a well-formed v1 stamp.
    static HashcashStamp parse(std::string_view text);
    /// Stamp date in Unix seconds; throws FormatError.
    std::int64_t date_seconds() const;

    friend bool operator==(const HashcashStamp&, const HashcashStamp&) = default;
};

struct PowPolicy {
    int required_bits = 12;
    std::chrono::seconds max_stamp_age{600};
    std::chrono::seconds clock_skew{120};
};

enum class StampCheck { Ok, Malformed, InsufficientWork, BelowPolicy, Expired, FutureDated, WrongResource, Replayed };

std::string_view stamp_check_name(StampCheck c) noexcept;

std::string format_stamp_date(std::int64_t unix_seconds);

/// Stamps already spent at this responder. Entries expire with the stamp age
/// window, which bounds the set. Access is serialized internally.
class StampReplaySet {
public:
    bool contains(const std::string& stamp) const;
    void insert(const std::string& stamp, std::int64_t expires_at);
    void prune(std::int64_t now);
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::int64_t> spent_;
};

struct MintStats {
    std::uint64_t attempts = 0;
};

/// Searches counters 0, 1, 2, ... until the SHA-1 digest of the stamp has at
/// least `policy.required_bits` leading zero bits.
HashcashStamp mint(const std::string& resource, const StampExtension& extension, const PowPolicy& policy,
                   RandomSource& rng, std::int64_t now, MintStats* stats = nullptr);

/// Same search, abandoned (nullopt) once `stop` is requested.
std::optional<HashcashStamp> mint(const std::string& resource, const StampExtension& extension,
                                  const PowPolicy& policy, RandomSource& rng, std::int64_t now, std::stop_token stop,
                                  MintStats* stats = nullptr);

/// Full check without spending the stamp. Computes one SHA-1 digest at most.
StampCheck check_stamp(const HashcashStamp& stamp, std::string_view expected_resource, const PowPolicy& policy,
                       const StampReplaySet& seen, std::int64_t now);

/// check_stamp, then records the stamp as spent when it passes.
bool verify_stamp(const HashcashStamp& stamp, std::string_view expected_resource, const PowPolicy& policy,
                  StampReplaySet& seen, std::int64_t now);

int leading_zero_bits(std::span<const std::uint8_t> digest) noexcept;

/// Number of stamp digests computed by this process; instrumentation for
/// the verification-cost checks.
std::uint64_t stamp_hash_count() noexcept;

/// Identifier of a negotiation: SHA-256 over the round-one stamp string.
struct NegotiationId {
    Sha256Digest digest{};

    std::string hex() const { return to_hex(digest); }
    /// Throws FormatError.
    static NegotiationId parse(std::string_view hex);

    friend auto operator<=>(const NegotiationId&, const NegotiationId&) = default;
    friend bool operator==(const NegotiationId&, const NegotiationId&) = default;
};

NegotiationId negotiation_id_from(const HashcashStamp& stamp);

}  // namespace ssla
