#pragma once

// Data-parallel inner loops of the solver and the velocity law.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2 (x86-64) or NEON (aarch64) variant. The variant is
// picked once at runtime from CPU features; BOHM_SIMD=scalar|avx2|neon in
// the environment forces a specific backend.
//
// Element-wise kernels perform the same IEEE operations in the same order as
// the scalar reference, so their results are bit-identical across backends
// (the build disables floating-point contraction). Reductions only agree to
// rounding because the vector variants sum in lanes.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace bohm::simd {

using cplx = std::complex<double>;

enum class Backend { scalar, avx2, neon };

std::string_view to_string(Backend b);

struct KernelTable {
    Backend backend;

    // psi[i] *= factor[i]
    void (*cmul_inplace)(cplx* psi, const cplx* factor, std::size_t n);
    // psi[i] *= s
    void (*scale_inplace)(cplx* psi, double s, std::size_t n);
    // out[i] = re^2 + im^2
    void (*abs_sq)(const cplx* psi, double* out, std::size_t n);
    // sum_i re^2 + im^2
    double (*norm_sq_sum)(const cplx* psi, std::size_t n);
    // spec[i] *= i * k[i]
    void (*mul_ik)(cplx* spec, const double* k, std::size_t n);
    // v[i] = scale * Im(dpsi[i] * conj(psi[i])) / |psi[i]|^2, or 0 with
    // flag[i] = 1 where |psi[i]|^2 < eps.
    void (*phase_velocity)(const cplx* psi, const cplx* dpsi, double scale, double eps,
                           double* v, std::uint8_t* flag, std::size_t n);
};

// Best backend for this machine, honouring BOHM_SIMD.
const KernelTable& kernels();

// Backends compiled in and supported by the running CPU; scalar is always first.
std::vector<Backend> available_backends();

// Throws std::invalid_argument if the backend is unavailable.
const KernelTable& kernels_for(Backend b);

namespace detail {
const KernelTable& scalar_table();
#if defined(BOHM_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(BOHM_HAVE_NEON)
const KernelTable& neon_table();
#endif
}  // namespace detail

// Span conveniences over the active table.
inline void cmul_inplace(std::span<cplx> psi, std::span<const cplx> factor) {
    kernels().cmul_inplace(psi.data(), factor.data(), psi.size());
}
inline void scale_inplace(std::span<cplx> psi, double s) {
    kernels().scale_inplace(psi.data(), s, psi.size());
}
inline void abs_sq(std::span<const cplx> psi, std::span<double> out) {
    kernels().abs_sq(psi.data(), out.data(), psi.size());
}
inline double norm_sq_sum(std::span<const cplx> psi) {
    return kernels().norm_sq_sum(psi.data(), psi.size());
}

}  // namespace bohm::simd
