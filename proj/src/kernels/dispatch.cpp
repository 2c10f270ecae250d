#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

#include "dime/core/error.hpp"
#include "dime/kernels/cascade_kernels.hpp"

namespace dime::kernels {
namespace {

constexpr KernelTable kScalar{Level::scalar, &scalar::cascade_round, &scalar::fill_draws};
#if defined(DIME_HAVE_AVX2)
constexpr KernelTable kAvx2{Level::avx2, &avx2::cascade_round, &avx2::fill_draws};
#endif

const KernelTable* select_default() noexcept {
    if (const char* env = std::getenv("DIME_KERNEL")) {
        const std::string want{env};
        if (want == "scalar") return &kScalar;
        if (want == "avx2" && supported(Level::avx2)) return &table(Level::avx2);
    }
    if (supported(Level::avx2)) return &table(Level::avx2);
    return &kScalar;
}

std::atomic<const KernelTable*>& slot() {
    static std::atomic<const KernelTable*> current{select_default()};
    return current;
}

}  // namespace

std::int32_t activation_limit(double p) noexcept {
    if (!(p > 0.0)) return kEdgeDisabled;
    if (p >= 1.0) return 0x7fffffff;
    const double scaled = std::floor(p * 2147483648.0);
    return static_cast<std::int32_t>(static_cast<std::int64_t>(scaled) - 1);
}

bool supported(Level level) noexcept {
    switch (level) {
        case Level::scalar:
            return true;
        case Level::avx2:
#if defined(DIME_HAVE_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& table(Level level) {
    if (!supported(level)) throw ValidationError("kernel level not supported: " + std::string(name(level)));
    switch (level) {
#if defined(DIME_HAVE_AVX2)
        case Level::avx2:
            return kAvx2;
#endif
        default:
            return kScalar;
    }
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

void force(Level level) { slot().store(&table(level), std::memory_order_release); }

std::string_view name(Level level) noexcept {
    switch (level) {
        case Level::scalar:
            return "scalar";
        case Level::avx2:
            return "avx2";
    }
    return "unknown";
}

}  // namespace dime::kernels
