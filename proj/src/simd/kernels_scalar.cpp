#include "bohm/simd/kernels.hpp"

namespace bohm::simd::detail {
namespace {

// Operation order here is the reference the vector variants reproduce.

void cmul_inplace(cplx* psi, const cplx* factor, std::size_t n) {
    auto* p = reinterpret_cast<double*>(psi);
    const auto* f = reinterpret_cast<const double*>(factor);
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = p[2 * i], ai = p[2 * i + 1];
        const double br = f[2 * i], bi = f[2 * i + 1];
        p[2 * i] = ar * br - ai * bi;
        p[2 * i + 1] = ai * br + ar * bi;
    }
}

void scale_inplace(cplx* psi, double s, std::size_t n) {
    auto* p = reinterpret_cast<double*>(psi);
    for (std::size_t i = 0; i < 2 * n; ++i) p[i] *= s;
}

void abs_sq(const cplx* psi, double* out, std::size_t n) {
    const auto* p = reinterpret_cast<const double*>(psi);
    for (std::size_t i = 0; i < n; ++i) {
        const double re = p[2 * i], im = p[2 * i + 1];
        out[i] = re * re + im * im;
    }
}

double norm_sq_sum(const cplx* psi, std::size_t n) {
    const auto* p = reinterpret_cast<const double*>(psi);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double re = p[2 * i], im = p[2 * i + 1];
        acc += re * re + im * im;
    }
    return acc;
}

void mul_ik(cplx* spec, const double* k, std::size_t n) {
    auto* p = reinterpret_cast<double*>(spec);
    for (std::size_t i = 0; i < n; ++i) {
        const double re = p[2 * i], im = p[2 * i + 1];
        p[2 * i] = -(k[i] * im);
        p[2 * i + 1] = k[i] * re;
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

const KernelTable& scalar_table() {
    static const KernelTable table{Backend::scalar, cmul_inplace, scale_inplace, abs_sq,
                                   norm_sq_sum,     mul_ik,       phase_velocity};
    return table;
}

}  // namespace bohm::simd::detail
