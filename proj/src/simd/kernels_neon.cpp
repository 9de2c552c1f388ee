// aarch64 only. One complex double per 128-bit register.
#include "bohm/simd/kernels.hpp"

#include <arm_neon.h>

namespace bohm::simd::detail {
namespace {

void cmul_inplace(cplx* psi, const cplx* factor, std::size_t n) {
    auto* p = reinterpret_cast<double*>(psi);
    const auto* f = reinterpret_cast<const double*>(factor);
    const float64x2_t sign = {-1.0, 1.0};
    for (std::size_t i = 0; i < n; ++i) {
        const float64x2_t a = vld1q_f64(p + 2 * i);
        const float64x2_t b = vld1q_f64(f + 2 * i);
        const float64x2_t t1 = vmulq_f64(a, vdupq_laneq_f64(b, 0));                // ar*br, ai*br
        const float64x2_t t2 = vmulq_f64(vextq_f64(a, a, 1), vdupq_laneq_f64(b, 1));  // ai*bi, ar*bi
        vst1q_f64(p + 2 * i, vaddq_f64(t1, vmulq_f64(t2, sign)));
    }
}

void scale_inplace(cplx* psi, double s, std::size_t n) {
    auto* p = reinterpret_cast<double*>(psi);
    for (std::size_t i = 0; i < n; ++i) vst1q_f64(p + 2 * i, vmulq_n_f64(vld1q_f64(p + 2 * i), s));
}

void abs_sq(const cplx* psi, double* out, std::size_t n) {
    const auto* p = reinterpret_cast<const double*>(psi);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t a = vld1q_f64(p + 2 * i), b = vld1q_f64(p + 2 * i + 2);
        vst1q_f64(out + i, vpaddq_f64(vmulq_f64(a, a), vmulq_f64(b, b)));
    }
    for (; i < n; ++i) {
        const double re = p[2 * i], im = p[2 * i + 1];
        out[i] = re * re + im * im;
    }
}

double norm_sq_sum(const cplx* psi, std::size_t n) {
    const auto* p = reinterpret_cast<const double*>(psi);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t a = vld1q_f64(p + 2 * i), b = vld1q_f64(p + 2 * i + 2);
        acc = vaddq_f64(acc, vpaddq_f64(vmulq_f64(a, a), vmulq_f64(b, b)));
    }
    double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) {
        const double re = p[2 * i], im = p[2 * i + 1];
        total += re * re + im * im;
    }
    return total;
}

void mul_ik(cplx* spec, const double* k, std::size_t n) {
    auto* p = reinterpret_cast<double*>(spec);
    const float64x2_t sign = {-1.0, 1.0};
    for (std::size_t i = 0; i < n; ++i) {
        const float64x2_t z = vld1q_f64(p + 2 * i);
        vst1q_f64(p + 2 * i, vmulq_f64(vmulq_n_f64(vextq_f64(z, z, 1), k[i]), sign));
    }
}

void phase_velocity(const cplx* psi, const cplx* dpsi, double scale, double eps, double* v,
                    std::uint8_t* flag, std::size_t n) {
    const auto* p = reinterpret_cast<const double*>(psi);
    const auto* d = reinterpret_cast<const double*>(dpsi);
    for (std::size_t i = 0; i < n; ++i) {
        const double re = p[2 * i], im = p[2 * i + 1];
        const double rho = re * re + im * im;
        if (rho < eps) {
            v[i] = 0.0;
            flag[i] = 1;
        } else {
            const double num = d[2 * i + 1] * re - d[2 * i] * im;
            v[i] = scale * (num / rho);
            flag[i] = 0;
        }
    }
}

}  // namespace

const KernelTable& neon_table() {
    static const KernelTable table{Backend::neon, cmul_inplace, scale_inplace, abs_sq,
                                   norm_sq_sum,   mul_ik,       phase_velocity};
    return table;
}

}  // namespace bohm::simd::detail
