#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <random>
#include <span>

#include "ssla/crypto.hpp"

namespace ssla {

class RandomSource {
public:
    virtual ~RandomSource() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;

    Bytes bytes(std::size_t n) {
        Bytes out(n);
        fill(out);
        return out;
    }
};

/// OpenSSL's CSPRNG.
class SystemRandom final : public RandomSource {
public:
    void fill(std::span<std::uint8_t> out) override;
};

/// Reproducible stream for test hooks. Not for production use.
class SeededRandom final : public RandomSource {
public:
    explicit SeededRandom(std::uint64_t seed) : engine_(seed) {}
    void fill(std::span<std::uint8_t> out) override;

private:
    std::mutex mutex_;
    std::mt19937_64 engine_;
};

/// Seconds since the Unix epoch.
using Clock = std::function<std::int64_t()>;

Clock system_clock();
Clock fixed_clock(std::int64_t unix_seconds);

}  // namespace ssla
