#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

struct evp_pkey_st;

namespace ssla {

using Bytes = std::vector<std::uint8_t>;
using Sha256Digest = std::array<std::uint8_t, 32>;
using Sha1Digest = std::array<std::uint8_t, 20>;

inline std::span<const std::uint8_t> as_bytes(std::string_view s) noexcept {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

Sha256Digest sha256(std::span<const std::uint8_t> data);
Sha1Digest sha1(std::span<const std::uint8_t> data);

// Encoders are strict: decoding only accepts the exact text the matching
// encoder produces, so every byte string has one textual form.
std::string to_hex(std::span<const std::uint8_t> data);
Bytes from_hex(std::string_view text);
std::string base64_encode(std::span<const std::uint8_t> data);
Bytes base64_decode(std::string_view text);
/// RFC 4648 url-safe alphabet, no padding.
std::string base64url_encode(std::span<const std::uint8_t> data);
Bytes base64url_decode(std::string_view text);

/// RSA public key. Identity derivation hashes the DER SubjectPublicKeyInfo
/// encoding returned by `der()`.
class PublicKey {
public:
    /// Throws MalformedKeyError for non-RSA keys or moduli below 2048 bits.
    static PublicKey from_der(std::span<const std::uint8_t> der);
    static PublicKey from_pem(std::string_view pem);
    static PublicKey load(const std::filesystem::path& path);

    const Bytes& der() const noexcept { return *der_; }
    std::string to_pem() const;
    int bits() const;
    evp_pkey_st* native() const noexcept { return key_.get(); }

    friend bool operator==(const PublicKey& a, const PublicKey& b) { return a.der() == b.der(); }

private:
    PublicKey(std::shared_ptr<evp_pkey_st> key, std::shared_ptr<const Bytes> der)
        : key_(std::move(key)), der_(std::move(der)) {}
    std::shared_ptr<evp_pkey_st> key_;
    // Encoding once up front; OpenSSL 3 encoders are slow enough to dominate
    // audits that look keys up repeatedly.
    std::shared_ptr<const Bytes> der_;
    friend class PrivateKey;
};

class PrivateKey {
public:
    static PrivateKey generate(int bits = 2048);
    /// Accepts PKCS#8 or traditional RSA PEM. Throws MalformedKeyError.
    static PrivateKey from_pem(std::string_view pem);
    static PrivateKey load(const std::filesystem::path& path);

    PublicKey public_key() const;
    std::string to_pem() const;
    evp_pkey_st* native() const noexcept { return key_.get(); }

private:
    explicit PrivateKey(std::shared_ptr<evp_pkey_st> key) : key_(std::move(key)) {}
    std::shared_ptr<evp_pkey_st> key_;
};

enum class IdentityBinding { PublicKeyHash, Certificate };

/// A party's identity: SHA-256 of its public key (`pkh:<hex>`) or of a
/// certificate (`cert:<hex>`).
struct PartyIdentity {
    Sha256Digest digest{};
    IdentityBinding binding = IdentityBinding::PublicKeyHash;

    std::string hex() const { return to_hex(digest); }
    std::string str() const;
    /// Throws FormatError.
    static PartyIdentity parse(std::string_view text);

    friend auto operator<=>(const PartyIdentity&, const PartyIdentity&) = default;
    friend bool operator==(const PartyIdentity&, const PartyIdentity&) = default;
};

PartyIdentity derive_identity(const PublicKey& key);
PartyIdentity derive_identity_from_certificate(std::span<const std::uint8_t> certificate_der);

/// RSASSA-PKCS1-v1_5 over SHA-256. Deterministic, so identical bodies signed
/// with the same key give identical signatures.
inline constexpr std::string_view kRsaSha256 = "RSA-SHA256";

struct Signature {
    std::string algorithm;
    Bytes bytes;

    friend bool operator==(const Signature&, const Signature&) = default;
};

Signature sign(std::span<const std::uint8_t> body, const PrivateKey& key);
/// Throws Error(UnsupportedAlgorithm) for algorithms other than RSA-SHA256.
bool verify(std::span<const std::uint8_t> body, const Signature& sig, const PublicKey& key);

}  // namespace ssla
