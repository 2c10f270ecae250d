#pragma once
// Data-parallel inner loops of the cascade simulator.
//
// Every edge activation draw is a counter-based hash of (round key, edge
// index), so a round is a pure function of its inputs and identical draws can
// be replayed across coupled simulations. Each kernel has a scalar reference
// implementation and vectorized variants that must agree bit for bit.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace dime::kernels {

// Activation limit for propagation probability p: an edge fires in a round iff
// (draw >> 1) <= limit. limit = -1 disables the edge entirely.
std::int32_t activation_limit(double p) noexcept;

inline constexpr std::int32_t kEdgeDisabled = -1;

// 32-bit draw for edge `index` under `key`. Scalar definition shared by all
// variants.
constexpr std::uint32_t lowbias32(std::uint32_t x) noexcept {
    x ^= x >> 16;
    x *= 0x21f0aaadU;
    x ^= x >> 15;
    x *= 0x735a2d97U;
    x ^= x >> 15;
    return x;
}

constexpr std::uint32_t edge_draw(std::uint64_t key, std::uint32_t index) noexcept {
    const auto k0 = static_cast<std::uint32_t>(key);
    const auto k1 = static_cast<std::uint32_t>(key >> 32);
    std::uint32_t h = lowbias32(index * 0x9e3779b1U + k0);
    return lowbias32(h ^ k1);
}

// Edge arrays of one instantiated network, structure-of-arrays.
struct EdgeSpan {
    const std::int32_t* src = nullptr;
    const std::int32_t* dst = nullptr;
    const std::int32_t* limit = nullptr;
    std::size_t size = 0;
};

// One synchronous diffusion round. `cur` and `next` hold 0/1 per node; `next`
// must equal `cur` on entry. For every edge whose source is influenced in
// `cur`, whose target is not, and whose limit is >= 0, a draw is taken and the
// target is set in `next` when it fires. Returns the number of such frontier
// edges; zero means no later round can change anything.
using CascadeRoundFn = std::size_t (*)(EdgeSpan edges, std::uint64_t key,
                                      const std::uint32_t* cur, std::uint32_t* next);

// Fills out[i] = edge_draw(key, first + i).
using DrawFillFn = void (*)(std::uint64_t key, std::uint32_t first, std::span<std::uint32_t> out);

enum class Level { scalar, avx2 };

struct KernelTable {
    Level level;
    CascadeRoundFn cascade_round;
    DrawFillFn fill_draws;
};

namespace scalar {
std::size_t cascade_round(EdgeSpan edges, std::uint64_t key, const std::uint32_t* cur,
                          std::uint32_t* next);
void fill_draws(std::uint64_t key, std::uint32_t first, std::span<std::uint32_t> out);
}  // namespace scalar

#if defined(DIME_HAVE_AVX2)
namespace avx2 {
std::size_t cascade_round(EdgeSpan edges, std::uint64_t key, const std::uint32_t* cur,
                          std::uint32_t* next);
void fill_draws(std::uint64_t key, std::uint32_t first, std::span<std::uint32_t> out);
}  // namespace avx2
#endif

// True when the variant was compiled in and the running CPU supports it.
bool supported(Level level) noexcept;

// Table selected at first use: the best supported level, unless the
// DIME_KERNEL environment variable names one ("scalar", "avx2").
const KernelTable& active() noexcept;

// Overrides the active table. Throws ValidationError if unsupported.
void force(Level level);

const KernelTable& table(Level level);

std::string_view name(Level level) noexcept;

}  // namespace dime::kernels
