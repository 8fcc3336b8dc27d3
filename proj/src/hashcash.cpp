#include "ssla/hashcash.hpp"

#include <atomic>
#include <charconv>
#include <ctime>
#include <vector>

#include "ssla/error.hpp"

namespace ssla {

namespace {

std::atomic<std::uint64_t> g_stamp_hashes{0};

Sha1Digest stamp_digest(const std::string& text) {
    g_stamp_hashes.fetch_add(1, std::memory_order_relaxed);
    return sha1(as_bytes(text));
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

int parse_small_int(std::string_view s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || v < 0 || (s.size() > 1 && s[0] == '0')) {
        throw FormatError("bad stamp integer '" + std::string(s) + "'");
    }
    return v;
}

std::string counter_text(std::uint64_t counter) {
    char buf[17];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), counter, 16);
    return std::string(buf, ptr);
}

bool field_chars_ok(std::string_view s) {
    for (char c : s) {
        if (c == ':' || static_cast<unsigned char>(c) <= ' ' || static_cast<unsigned char>(c) > '~') return false;
    }
    return true;
}

PartyIdentity identity_from(std::string_view b64) {
    auto bytes = base64url_decode(b64);
    if (bytes.size() != 32) throw FormatError("stamp extension identity must be 32 bytes");
    PartyIdentity id;
    std::copy(bytes.begin(), bytes.end(), id.digest.begin());
    return id;
}

std::optional<HashcashStamp> search(const std::string& resource, const StampExtension& extension,
                                    const PowPolicy& policy, RandomSource& rng, std::int64_t now,
                                    const std::stop_token* stop, MintStats* stats) {
    HashcashStamp stamp;
    stamp.bits = policy.required_bits;
    stamp.date = format_stamp_date(now);
    stamp.resource = resource;
    stamp.extension = extension.encode();
    stamp.rand = base64_encode(rng.bytes(12));

    std::string prefix = stamp.str();
    prefix.resize(prefix.size() - stamp.counter.size());
    for (std::uint64_t counter = 0;; ++counter) {
        if (stop != nullptr && (counter & 0x3ff) == 0 && stop->stop_requested()) return std::nullopt;
        std::string text = prefix + counter_text(counter);
        auto digest = stamp_digest(text);
        if (leading_zero_bits(digest) >= stamp.bits) {
            if (stats != nullptr) stats->attempts = counter + 1;
            stamp.counter = counter_text(counter);
            return stamp;
        }
    }
}

}  // namespace

std::string StampExtension::encode() const {
    return "init=" + base64url_encode(initiator.digest) + ";resp=" + base64url_encode(responder.digest) +
           ";nonce=" + base64url_encode(nonce);
}

StampExtension StampExtension::decode(std::string_view text) {
    auto parts = split(text, ';');
    if (parts.size() != 3) throw FormatError("stamp extension needs exactly init, resp and nonce");
    auto value = [&](std::size_t i, std::string_view key) {
        auto part = parts[i];
        if (part.substr(0, key.size() + 1) != std::string(key) + "=") {
            throw FormatError("stamp extension field " + std::to_string(i) + " must be '" + std::string(key) + "'");
        }
        return part.substr(key.size() + 1);
    };
    StampExtension ext;
    ext.initiator = identity_from(value(0, "init"));
    ext.responder = identity_from(value(1, "resp"));
    ext.nonce = base64url_decode(value(2, "nonce"));
    if (ext.nonce.empty()) throw FormatError("stamp extension nonce is empty");
    return ext;
}

std::string HashcashStamp::str() const {
    return std::to_string(version) + ":" + std::to_string(bits) + ":" + date + ":" + resource + ":" + extension + ":" +
           rand + ":" + counter;
}

HashcashStamp HashcashStamp::parse(std::string_view text) {
    auto parts = split(text, ':');
    if (parts.size() != 7) throw FormatError("hashcash stamp needs 7 fields");
    HashcashStamp s;
    s.version = parse_small_int(parts[0]);
    if (s.version != 1) throw FormatError("only hashcash version 1 is supported");
    s.bits = parse_small_int(parts[1]);
    if (s.bits > 160) throw FormatError("stamp claims more bits than SHA-1 has");
    s.date = std::string(parts[2]);
    s.resource = std::string(parts[3]);
    s.extension = std::string(parts[4]);
    s.rand = std::string(parts[5]);
    s.counter = std::string(parts[6]);
    for (auto field : parts) {
        if (!field_chars_ok(field)) throw FormatError("stamp contains forbidden characters");
    }
    if (s.rand.empty() || s.counter.empty()) throw FormatError("stamp rand and counter must be non-empty");
    s.date_seconds();
    return s;
}

std::string format_stamp_date(std::int64_t unix_seconds) {
    std::time_t t = static_cast<std::time_t>(unix_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[16];
    std::strftime(buf, sizeof(buf), "%y%m%d%H%M%S", &tm);
    return buf;
}

std::int64_t HashcashStamp::date_seconds() const {
    if (date.size() != 12) throw FormatError("stamp date must be YYMMDDhhmmss");
    for (char c : date) {
        if (c < '0' || c > '9') throw FormatError("stamp date must be numeric");
    }
    auto two = [&](std::size_t i) { return (date[i] - '0') * 10 + (date[i + 1] - '0'); };
    std::tm tm{};
    tm.tm_year = 100 + two(0);
    tm.tm_mon = two(2) - 1;
    tm.tm_mday = two(4);
    tm.tm_hour = two(6);
    tm.tm_min = two(8);
    tm.tm_sec = two(10);
    if (tm.tm_mon < 0 || tm.tm_mon > 11 || tm.tm_mday < 1 || tm.tm_mday > 31 || tm.tm_hour > 23 || tm.tm_min > 59 ||
        tm.tm_sec > 59) {
        throw FormatError("stamp date out of range");
    }
    auto secs = static_cast<std::int64_t>(timegm(&tm));
    if (format_stamp_date(secs) != date) throw FormatError("stamp date does not exist");
    return secs;
}

std::string_view stamp_check_name(StampCheck c) noexcept {
    switch (c) {
        case StampCheck::Ok: return "ok";
        case StampCheck::Malformed: return "malformed";
        case StampCheck::InsufficientWork: return "insufficient-work";
        case StampCheck::BelowPolicy: return "below-policy";
        case StampCheck::Expired: return "expired";
        case StampCheck::FutureDated: return "future-dated";
        case StampCheck::WrongResource: return "wrong-resource";
        case StampCheck::Replayed: return "replayed";
    }
    return "?";
}

bool StampReplaySet::contains(const std::string& stamp) const {
    std::lock_guard lock(mutex_);
    return spent_.count(stamp) != 0;
}

void StampReplaySet::insert(const std::string& stamp, std::int64_t expires_at) {
    std::lock_guard lock(mutex_);
    spent_[stamp] = expires_at;
}

void StampReplaySet::prune(std::int64_t now) {
    std::lock_guard lock(mutex_);
    for (auto it = spent_.begin(); it != spent_.end();) {
        it = it->second < now ? spent_.erase(it) : std::next(it);
    }
}

std::size_t StampReplaySet::size() const {
    std::lock_guard lock(mutex_);
    return spent_.size();
}

HashcashStamp mint(const std::string& resource, const StampExtension& extension, const PowPolicy& policy,
                   RandomSource& rng, std::int64_t now, MintStats* stats) {
    return *search(resource, extension, policy, rng, now, nullptr, stats);
}

std::optional<HashcashStamp> mint(const std::string& resource, const StampExtension& extension,
                                  const PowPolicy& policy, RandomSource& rng, std::int64_t now, std::stop_token stop,
                                  MintStats* stats) {
    return search(resource, extension, policy, rng, now, &stop, stats);
}

StampCheck check_stamp(const HashcashStamp& stamp, std::string_view expected_resource, const PowPolicy& policy,
                       const StampReplaySet& seen, std::int64_t now) {
    if (stamp.version != 1) return StampCheck::Malformed;
    if (stamp.bits < policy.required_bits) return StampCheck::BelowPolicy;
    if (stamp.resource != expected_resource) return StampCheck::WrongResource;
    std::int64_t date = 0;
    try {
        date = stamp.date_seconds();
    } catch (const FormatError&) {
        return StampCheck::Malformed;
    }
    if (date > now + policy.clock_skew.count()) return StampCheck::FutureDated;
    if (date < now - policy.max_stamp_age.count() - policy.clock_skew.count()) return StampCheck::Expired;
    const auto text = stamp.str();
    if (seen.contains(text)) return StampCheck::Replayed;
    if (leading_zero_bits(stamp_digest(text)) < stamp.bits) return StampCheck::InsufficientWork;
    return StampCheck::Ok;
}

bool verify_stamp(const HashcashStamp& stamp, std::string_view expected_resource, const PowPolicy& policy,
                  StampReplaySet& seen, std::int64_t now) {
    if (check_stamp(stamp, expected_resource, policy, seen, now) != StampCheck::Ok) return false;
    seen.insert(stamp.str(), stamp.date_seconds() + policy.max_stamp_age.count() + policy.clock_skew.count());
    return true;
}

int leading_zero_bits(std::span<const std::uint8_t> digest) noexcept {
    int bits = 0;
    for (auto b : digest) {
        if (b == 0) {
            bits += 8;
            continue;
        }
        for (int i = 7; i >= 0 && ((b >> i) & 1) == 0; --i) ++bits;
        break;
    }
    return bits;
}

std::uint64_t stamp_hash_count() noexcept { return g_stamp_hashes.load(std::memory_order_relaxed); }

NegotiationId NegotiationId::parse(std::string_view hex) {
    auto bytes = from_hex(hex);
    if (bytes.size() != 32) throw FormatError("negotiation id must be 32 bytes");
    NegotiationId id;
    std::copy(bytes.begin(), bytes.end(), id.digest.begin());
    return id;
}

NegotiationId negotiation_id_from(const HashcashStamp& stamp) { return {sha256(as_bytes(stamp.str()))}; }

}  // namespace ssla
