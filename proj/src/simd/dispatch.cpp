#include "bohm/simd/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace bohm::simd {

std::string_view to_string(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "unknown";
}

namespace {

bool cpu_supports(Backend b) {
    switch (b) {
        case Backend::scalar: return true;
        case Backend::avx2:
#if defined(BOHM_HAVE_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Backend::neon:
#if defined(BOHM_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& select() {
    if (const char* forced = std::getenv("BOHM_SIMD")) {
        const std::string name(forced);
        for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon})
            if (name == to_string(b) && cpu_supports(b)) return kernels_for(b);
    }
    const auto backends = available_backends();
    return kernels_for(backends.back());
}

}  // namespace

std::vector<Backend> available_backends() {
    std::vector<Backend> out{Backend::scalar};
    for (Backend b : {Backend::avx2, Backend::neon})
        if (cpu_supports(b)) out.push_back(b);
    return out;
}

const KernelTable& kernels_for(Backend b) {
    if (!cpu_supports(b))
        throw std::invalid_argument("SIMD backend not available: " + std::string(to_string(b)));
    switch (b) {
#if defined(BOHM_HAVE_AVX2)
        case Backend::avx2: return detail::avx2_table();
#endif
#if defined(BOHM_HAVE_NEON)
        case Backend::neon: return detail::neon_table();
#endif
        default: return detail::scalar_table();
    }
}

const KernelTable& kernels() {
    static const KernelTable& active = select();
    return active;
}

}  // namespace bohm::simd
