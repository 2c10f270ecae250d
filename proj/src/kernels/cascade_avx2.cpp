// Compiled with -mavx2; only reached after a runtime CPU check.
#include <immintrin.h>

#include "dime/kernels/cascade_kernels.hpp"

namespace dime::kernels::avx2 {
namespace {

inline __m256i lowbias32(__m256i x) {
    x = _mm256_xor_si256(x, _mm256_srli_epi32(x, 16));
    x = _mm256_mullo_epi32(x, _mm256_set1_epi32(0x21f0aaad));
    x = _mm256_xor_si256(x, _mm256_srli_epi32(x, 15));
    x = _mm256_mullo_epi32(x, _mm256_set1_epi32(0x735a2d97));
    x = _mm256_xor_si256(x, _mm256_srli_epi32(x, 15));
    return x;
}

inline __m256i draws(__m256i index, __m256i k0, __m256i k1) {
    __m256i h = _mm256_add_epi32(_mm256_mullo_epi32(index, _mm256_set1_epi32(static_cast<int>(0x9e3779b1U))), k0);
    h = lowbias32(h);
    return lowbias32(_mm256_xor_si256(h, k1));
}

}  // namespace

std::size_t cascade_round(EdgeSpan edges, std::uint64_t key, const std::uint32_t* cur,
                          std::uint32_t* next) {
    const __m256i k0 = _mm256_set1_epi32(static_cast<int>(static_cast<std::uint32_t>(key)));
    const __m256i k1 = _mm256_set1_epi32(static_cast<int>(static_cast<std::uint32_t>(key >> 32)));
    const __m256i lane = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
    const __m256i zero = _mm256_setzero_si256();
    const __m256i minus_one = _mm256_set1_epi32(-1);
    const auto* cur_i = reinterpret_cast<const int*>(cur);

    std::size_t frontier = 0;
    std::size_t e = 0;
    for (; e + 8 <= edges.size; e += 8) {
        const __m256i src = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(edges.src + e));
        const __m256i dst = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(edges.dst + e));
        const __m256i lim = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(edges.limit + e));
        const __m256i ws = _mm256_i32gather_epi32(cur_i, src, 4);
        const __m256i wd = _mm256_i32gather_epi32(cur_i, dst, 4);
        // active: ws != 0, wd == 0, lim >= 0
        __m256i active = _mm256_andnot_si256(_mm256_cmpeq_epi32(ws, zero), _mm256_cmpeq_epi32(wd, zero));
        active = _mm256_and_si256(active, _mm256_cmpgt_epi32(lim, minus_one));
        const int active_bits = _mm256_movemask_ps(_mm256_castsi256_ps(active));
        if (active_bits == 0) continue;
        frontier += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(active_bits)));

        const __m256i index = _mm256_add_epi32(_mm256_set1_epi32(static_cast<int>(e)), lane);
        const __m256i half = _mm256_srli_epi32(draws(index, k0, k1), 1);
        const __m256i fire = _mm256_andnot_si256(_mm256_cmpgt_epi32(half, lim), active);
        unsigned bits = static_cast<unsigned>(_mm256_movemask_ps(_mm256_castsi256_ps(fire)));
        while (bits) {
            const int j = __builtin_ctz(bits);
            next[edges.dst[e + static_cast<std::size_t>(j)]] = 1;
            bits &= bits - 1;
        }
    }
    if (e < edges.size) {
        EdgeSpan tail{edges.src + e, edges.dst + e, edges.limit + e, edges.size - e};
        // Tail indices must keep their global position for the draw.
        for (std::size_t t = 0; t < tail.size; ++t) {
            const std::int32_t lim = tail.limit[t];
            if (lim < 0 || !cur[tail.src[t]] || cur[tail.dst[t]]) continue;
            ++frontier;
            const auto half = static_cast<std::int32_t>(edge_draw(key, static_cast<std::uint32_t>(e + t)) >> 1);
            if (half <= lim) next[tail.dst[t]] = 1;
        }
    }
    return frontier;
}

void fill_draws(std::uint64_t key, std::uint32_t first, std::span<std::uint32_t> out) {
    const __m256i k0 = _mm256_set1_epi32(static_cast<int>(static_cast<std::uint32_t>(key)));
    const __m256i k1 = _mm256_set1_epi32(static_cast<int>(static_cast<std::uint32_t>(key >> 32)));
    const __m256i lane = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
    std::size_t i = 0;
    for (; i + 8 <= out.size(); i += 8) {
        const __m256i index = _mm256_add_epi32(_mm256_set1_epi32(static_cast<int>(first + i)), lane);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(out.data() + i), draws(index, k0, k1));
    }
    for (; i < out.size(); ++i) out[i] = edge_draw(key, first + static_cast<std::uint32_t>(i));
}

}  // namespace dime::kernels::avx2
