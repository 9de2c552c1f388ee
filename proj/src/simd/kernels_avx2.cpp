// Compiled with -mavx2 only; never called unless the CPU reports AVX2.
#include "bohm/simd/kernels.hpp"

#include <immintrin.h>

namespace bohm::simd::detail {
namespace {

// Two complex doubles per 256-bit register: (re0, im0, re1, im1).

void cmul_inplace(cplx* psi, const cplx* factor, std::size_t n) {
    auto* p = reinterpret_cast<double*>(psi);
    const auto* f = reinterpret_cast<const double*>(factor);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d a = _mm256_loadu_pd(p + 2 * i);
        const __m256d b = _mm256_loadu_pd(f + 2 * i);
        const __m256d b_re = _mm256_movedup_pd(b);          // br br
        const __m256d b_im = _mm256_permute_pd(b, 0b1111);  // bi bi
        const __m256d a_sw = _mm256_permute_pd(a, 0b0101);  // ai ar
        const __m256d t1 = _mm256_mul_pd(a, b_re);          // ar*br, ai*br
        const __m256d t2 = _mm256_mul_pd(a_sw, b_im);       // ai*bi, ar*bi
        _mm256_storeu_pd(p + 2 * i, _mm256_addsub_pd(t1, t2));
    }
    for (; i < n; ++i) {
        const double ar = p[2 * i], ai = p[2 * i + 1];
        const double br = f[2 * i], bi = f[2 * i + 1];
        p[2 * i] = ar * br - ai * bi;
        p[2 * i + 1] = ai * br + ar * bi;
    }
}

void scale_inplace(cplx* psi, double s, std::size_t n) {
    auto* p = reinterpret_cast<double*>(psi);
    const __m256d vs = _mm256_set1_pd(s);
    const std::size_t m = 2 * n;
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) _mm256_storeu_pd(p + i, _mm256_mul_pd(_mm256_loadu_pd(p + i), vs));
    for (; i < m; ++i) p[i] *= s;
}

// |z|^2 for four complex values, in index order.
inline __m256d abs_sq4(const double* p) {
    const __m256d a = _mm256_loadu_pd(p);
    const __m256d b = _mm256_loadu_pd(p + 4);
    const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
    return _mm256_permute4x64_pd(h, 0b11011000);
}

void abs_sq(const cplx* psi, double* out, std::size_t n) {
    const auto* p = reinterpret_cast<const double*>(psi);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, abs_sq4(p + 2 * i));
    for (; i < n; ++i) {
        const double re = p[2 * i], im = p[2 * i + 1];
        out[i] = re * re + im * im;
    }
}

double norm_sq_sum(const cplx* psi, std::size_t n) {
    const auto* p = reinterpret_cast<const double*>(psi);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, abs_sq4(p + 2 * i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) {
        const double re = p[2 * i], im = p[2 * i + 1];
        total += re * re + im * im;
    }
    return total;
}

void mul_ik(cplx* spec, const double* k, std::size_t n) {
    auto* p = reinterpret_cast<double*>(spec);
    const __m256d sign = _mm256_set_pd(0.0, -0.0, 0.0, -0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d z = _mm256_loadu_pd(p + 2 * i);
        const __m256d kk = _mm256_set_pd(k[i + 1], k[i + 1], k[i], k[i]);
        const __m256d sw = _mm256_permute_pd(z, 0b0101);  // im re
        _mm256_storeu_pd(p + 2 * i, _mm256_xor_pd(_mm256_mul_pd(kk, sw), sign));
    }
    for (; i < n; ++i) {
        const double re = p[2 * i], im = p[2 * i + 1];
        p[2 * i] = -(k[i] * im);
        p[2 * i + 1] = k[i] * re;
    }
}

void phase_velocity(const cplx* psi, const cplx* dpsi, double scale, double eps, double* v,
                    std::uint8_t* flag, std::size_t n) {
    const auto* p = reinterpret_cast<const double*>(psi);
    const auto* d = reinterpret_cast<const double*>(dpsi);
    const __m256d vscale = _mm256_set1_pd(scale);
    const __m256d veps = _mm256_set1_pd(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // Deinterleave four complex values into re/im vectors in index order.
        const __m256d p0 = _mm256_loadu_pd(p + 2 * i), p1 = _mm256_loadu_pd(p + 2 * i + 4);
        const __m256d d0 = _mm256_loadu_pd(d + 2 * i), d1 = _mm256_loadu_pd(d + 2 * i + 4);
        const __m256d re = _mm256_permute4x64_pd(_mm256_unpacklo_pd(p0, p1), 0b11011000);
        const __m256d im = _mm256_permute4x64_pd(_mm256_unpackhi_pd(p0, p1), 0b11011000);
        const __m256d dre = _mm256_permute4x64_pd(_mm256_unpacklo_pd(d0, d1), 0b11011000);
        const __m256d dim = _mm256_permute4x64_pd(_mm256_unpackhi_pd(d0, d1), 0b11011000);
        const __m256d rho = _mm256_add_pd(_mm256_mul_pd(re, re), _mm256_mul_pd(im, im));
        const __m256d num = _mm256_sub_pd(_mm256_mul_pd(dim, re), _mm256_mul_pd(dre, im));
        const __m256d vel = _mm256_mul_pd(vscale, _mm256_div_pd(num, rho));
        const __m256d small = _mm256_cmp_pd(rho, veps, _CMP_LT_OQ);
        _mm256_storeu_pd(v + i, _mm256_andnot_pd(small, vel));
        const int mask = _mm256_movemask_pd(small);
        for (int l = 0; l < 4; ++l) flag[i + l] = static_cast<std::uint8_t>((mask >> l) & 1);
    }
    for (; i < n; ++i) {
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

const KernelTable& avx2_table() {
    static const KernelTable table{Backend::avx2, cmul_inplace, scale_inplace, abs_sq,
                                   norm_sq_sum,   mul_ik,       phase_velocity};
    return table;
}

}  // namespace bohm::simd::detail
