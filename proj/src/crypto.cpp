#include "ssla/crypto.hpp"

#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <openssl/bio.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/rsa.h>
#include <openssl/x509.h>

#include "ssla/error.hpp"

namespace ssla {

namespace {

constexpr int kMinRsaBits = 2048;

using MdCtx = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;
using Bio = std::unique_ptr<BIO, decltype(&BIO_free)>;

std::shared_ptr<EVP_PKEY> own(EVP_PKEY* key) { return {key, EVP_PKEY_free}; }

Bytes encode_der(EVP_PKEY* key) {
    unsigned char* buf = nullptr;
    int len = i2d_PUBKEY(key, &buf);
    if (len <= 0) throw MalformedKeyError("cannot encode public key");
    Bytes out(buf, buf + len);
    OPENSSL_free(buf);
    return out;
}

void check_rsa(EVP_PKEY* key) {
    if (EVP_PKEY_base_id(key) != EVP_PKEY_RSA) throw MalformedKeyError("only RSA keys are supported");
    if (EVP_PKEY_get_bits(key) < kMinRsaBits) {
        throw MalformedKeyError("RSA key has " + std::to_string(EVP_PKEY_get_bits(key)) + " bits, need " +
                                std::to_string(kMinRsaBits));
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedKeyError("cannot read key file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

template <std::size_t N>
std::array<std::uint8_t, N> digest(const EVP_MD* md, std::span<const std::uint8_t> data) {
    std::array<std::uint8_t, N> out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, md, nullptr) != 1 || len != N) {
        throw Error(ErrorCode::UnsupportedAlgorithm, "digest failed");
    }
    return out;
}

std::string bio_contents(BIO* bio) {
    char* data = nullptr;
    long len = BIO_get_mem_data(bio, &data);
    return std::string(data, static_cast<std::size_t>(len));
}

constexpr std::string_view kB64 = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
constexpr std::string_view kB64Url = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

std::string b64_encode(std::span<const std::uint8_t> data, std::string_view alphabet, bool pad) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= data.size(); i += 3) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += alphabet[v & 63];
    }
    std::size_t rest = data.size() - i;
    if (rest == 1) {
        std::uint32_t v = data[i] << 16;
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        if (pad) out += "==";
    } else if (rest == 2) {
        std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        if (pad) out += '=';
    }
    return out;
}

Bytes b64_decode(std::string_view text, std::string_view alphabet, bool pad) {
    std::string_view body = text;
    if (pad) {
        if (text.size() % 4 != 0) throw FormatError("base64 length is not a multiple of 4");
        while (!body.empty() && body.back() == '=') body.remove_suffix(1);
        if (text.size() - body.size() > 2) throw FormatError("too much base64 padding");
    }
    if (body.size() % 4 == 1) throw FormatError("truncated base64");
    Bytes out;
    std::uint32_t acc = 0;
    int bits = 0;
    for (char c : body) {
        auto pos = alphabet.find(c);
        if (pos == std::string_view::npos) throw FormatError("invalid base64 character");
        acc = (acc << 6) | static_cast<std::uint32_t>(pos);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
        }
    }
    // leftover bits must be zero so that each byte string has one spelling
    if (bits > 0 && (acc & ((1u << bits) - 1)) != 0) throw FormatError("non-canonical base64");
    if (b64_encode(out, alphabet, pad) != text) throw FormatError("non-canonical base64");
    return out;
}

}  // namespace

Sha256Digest sha256(std::span<const std::uint8_t> data) { return digest<32>(EVP_sha256(), data); }

Sha1Digest sha1(std::span<const std::uint8_t> data) { return digest<20>(EVP_sha1(), data); }

std::string to_hex(std::span<const std::uint8_t> data) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out += kDigits[b >> 4];
        out += kDigits[b & 15];
    }
    return out;
}

Bytes from_hex(std::string_view text) {
    if (text.size() % 2 != 0) throw FormatError("odd-length hex");
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        throw FormatError("hex must be lowercase [0-9a-f]");
    };
    Bytes out;
    out.reserve(text.size() / 2);
    for (std::size_t i = 0; i < text.size(); i += 2) {
        out.push_back(static_cast<std::uint8_t>(nibble(text[i]) << 4 | nibble(text[i + 1])));
    }
    return out;
}

std::string base64_encode(std::span<const std::uint8_t> data) { return b64_encode(data, kB64, true); }
Bytes base64_decode(std::string_view text) { return b64_decode(text, kB64, true); }
std::string base64url_encode(std::span<const std::uint8_t> data) { return b64_encode(data, kB64Url, false); }
Bytes base64url_decode(std::string_view text) { return b64_decode(text, kB64Url, false); }

PublicKey PublicKey::from_der(std::span<const std::uint8_t> der) {
    // Parsed keys are immutable, so identical encodings share one EVP_PKEY.
    static std::mutex cache_mutex;
    static std::map<Bytes, std::shared_ptr<EVP_PKEY>> cache;
    auto bytes = std::make_shared<const Bytes>(der.begin(), der.end());
    {
        std::lock_guard lock(cache_mutex);
        auto it = cache.find(*bytes);
        if (it != cache.end()) return PublicKey(it->second, std::move(bytes));
    }
    const unsigned char* p = der.data();
    EVP_PKEY* raw = d2i_PUBKEY(nullptr, &p, static_cast<long>(der.size()));
    if (raw == nullptr || p != der.data() + der.size()) {
        if (raw != nullptr) EVP_PKEY_free(raw);
        throw MalformedKeyError("not a DER SubjectPublicKeyInfo");
    }
    auto key = own(raw);
    check_rsa(key.get());
    // the DER may be a non-canonical encoding of a valid key
    if (encode_der(key.get()) != *bytes) throw MalformedKeyError("non-canonical DER public key");
    std::lock_guard lock(cache_mutex);
    if (cache.size() >= 256) cache.clear();
    cache.emplace(*bytes, key);
    return PublicKey(std::move(key), std::move(bytes));
}

PublicKey PublicKey::from_pem(std::string_view pem) {
    Bio bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())), BIO_free);
    EVP_PKEY* raw = PEM_read_bio_PUBKEY(bio.get(), nullptr, nullptr, nullptr);
    if (raw == nullptr) throw MalformedKeyError("not a PEM public key");
    auto key = own(raw);
    check_rsa(key.get());
    return from_der(encode_der(key.get()));
}

PublicKey PublicKey::load(const std::filesystem::path& path) {
    auto text = read_file(path);
    // a private key file also yields its public half
    if (text.find("PRIVATE KEY") != std::string::npos) return PrivateKey::from_pem(text).public_key();
    return from_pem(text);
}

std::string PublicKey::to_pem() const {
    Bio bio(BIO_new(BIO_s_mem()), BIO_free);
    PEM_write_bio_PUBKEY(bio.get(), key_.get());
    return bio_contents(bio.get());
}

int PublicKey::bits() const { return EVP_PKEY_get_bits(key_.get()); }

PrivateKey PrivateKey::generate(int bits) {
    if (bits < kMinRsaBits) throw MalformedKeyError("refusing to generate a key below 2048 bits");
    EVP_PKEY* raw = EVP_RSA_gen(static_cast<unsigned int>(bits));
    if (raw == nullptr) throw MalformedKeyError("RSA key generation failed");
    return PrivateKey(own(raw));
}

PrivateKey PrivateKey::from_pem(std::string_view pem) {
    Bio bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())), BIO_free);
    EVP_PKEY* raw = PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr);
    if (raw == nullptr) throw MalformedKeyError("not a PEM private key");
    auto key = own(raw);
    check_rsa(key.get());
    return PrivateKey(std::move(key));
}

PrivateKey PrivateKey::load(const std::filesystem::path& path) { return from_pem(read_file(path)); }

PublicKey PrivateKey::public_key() const { return PublicKey::from_der(encode_der(key_.get())); }

std::string PrivateKey::to_pem() const {
    Bio bio(BIO_new(BIO_s_mem()), BIO_free);
    PEM_write_bio_PrivateKey(bio.get(), key_.get(), nullptr, nullptr, 0, nullptr, nullptr);
    return bio_contents(bio.get());
}

std::string PartyIdentity::str() const {
    return (binding == IdentityBinding::PublicKeyHash ? "pkh:" : "cert:") + hex();
}

PartyIdentity PartyIdentity::parse(std::string_view text) {
    PartyIdentity id;
    std::string_view hex;
    if (text.substr(0, 4) == "pkh:") {
        id.binding = IdentityBinding::PublicKeyHash;
        hex = text.substr(4);
    } else if (text.substr(0, 5) == "cert:") {
        id.binding = IdentityBinding::Certificate;
        hex = text.substr(5);
    } else {
        throw FormatError("identity must start with 'pkh:' or 'cert:'");
    }
    auto bytes = from_hex(hex);
    if (bytes.size() != id.digest.size()) throw FormatError("identity digest must be 32 bytes");
    std::copy(bytes.begin(), bytes.end(), id.digest.begin());
    return id;
}

PartyIdentity derive_identity(const PublicKey& key) {
    return {sha256(key.der()), IdentityBinding::PublicKeyHash};
}

PartyIdentity derive_identity_from_certificate(std::span<const std::uint8_t> certificate_der) {
    return {sha256(certificate_der), IdentityBinding::Certificate};
}

Signature sign(std::span<const std::uint8_t> body, const PrivateKey& key) {
    MdCtx ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    std::size_t len = 0;
    if (EVP_DigestSignInit(ctx.get(), nullptr, EVP_sha256(), nullptr, key.native()) != 1 ||
        EVP_DigestSign(ctx.get(), nullptr, &len, body.data(), body.size()) != 1) {
        throw MalformedKeyError("signing failed");
    }
    Bytes sig(len);
    if (EVP_DigestSign(ctx.get(), sig.data(), &len, body.data(), body.size()) != 1) {
        throw MalformedKeyError("signing failed");
    }
    sig.resize(len);
    return {std::string(kRsaSha256), std::move(sig)};
}

bool verify(std::span<const std::uint8_t> body, const Signature& sig, const PublicKey& key) {
    if (sig.algorithm != kRsaSha256) {
        throw Error(ErrorCode::UnsupportedAlgorithm, "unsupported signature algorithm '" + sig.algorithm + "'");
    }
    MdCtx ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (EVP_DigestVerifyInit(ctx.get(), nullptr, EVP_sha256(), nullptr, key.native()) != 1) return false;
    return EVP_DigestVerify(ctx.get(), sig.bytes.data(), sig.bytes.size(), body.data(), body.size()) == 1;
}

}  // namespace ssla
