#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <random>

#include "dime/core/error.hpp"

namespace dime {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to derive independent child seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) noexcept {
    return mix64(parent ^ mix64(tag + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b) noexcept {
    return derive_seed(derive_seed(parent, a), b);
}

inline Rng make_rng(std::uint64_t seed) { return Rng{mix64(seed)}; }

// Uniform double in [0, 1).
inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>{0.0, 1.0}(rng);
}

inline bool bernoulli(Rng& rng, double p) {
    if (p >= 1.0) return true;
    if (p <= 0.0) return false;
    return uniform01(rng) < p;
}

// Optional wall-clock limit checked cooperatively by planners.
class Deadline {
public:
    using Clock = std::chrono::steady_clock;

    Deadline() = default;
    static Deadline after(double seconds) {
        Deadline d;
        d.at_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(seconds));
        return d;
    }

    bool expired() const { return at_ && Clock::now() >= *at_; }
    void check(const char* where) const {
        if (expired()) throw BudgetExceeded(std::string("time budget exceeded in ") + where);
    }

private:
    std::optional<Clock::time_point> at_;
};

}  // namespace dime
