#include "dime/kernels/cascade_kernels.hpp"

namespace dime::kernels::scalar {

std::size_t cascade_round(EdgeSpan edges, std::uint64_t key, const std::uint32_t* cur,
                          std::uint32_t* next) {
    std::size_t frontier = 0;
    for (std::size_t e = 0; e < edges.size; ++e) {
        const std::int32_t lim = edges.limit[e];
        if (lim < 0 || !cur[edges.src[e]] || cur[edges.dst[e]]) continue;
        ++frontier;
        const auto half = static_cast<std::int32_t>(edge_draw(key, static_cast<std::uint32_t>(e)) >> 1);
        if (half <= lim) next[edges.dst[e]] = 1;
    }
    return frontier;
}

void fill_draws(std::uint64_t key, std::uint32_t first, std::span<std::uint32_t> out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = edge_draw(key, first + static_cast<std::uint32_t>(i));
    }
}

}  // namespace dime::kernels::scalar
