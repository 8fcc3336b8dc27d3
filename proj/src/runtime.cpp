#include "ssla/runtime.hpp"

#include <chrono>

#include <openssl/rand.h>

#include "ssla/error.hpp"

namespace ssla {

void SystemRandom::fill(std::span<std::uint8_t> out) {
    if (out.empty()) return;
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
        throw Error(ErrorCode::Config, "system random source failed");
    }
}

void SeededRandom::fill(std::span<std::uint8_t> out) {
    std::lock_guard lock(mutex_);
    for (auto& b : out) b = static_cast<std::uint8_t>(engine_() >> 56);
}

Clock system_clock() {
    return [] {
        return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
            .count();
    };
}

Clock fixed_clock(std::int64_t unix_seconds) {
    return [unix_seconds] { return unix_seconds; };
}

}  // namespace ssla
