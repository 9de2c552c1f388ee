#include "bohm/configspace/spectral_density.hpp"

#include "bohm/configspace/fft.hpp"
#include "bohm/error.hpp"

namespace bohm::configspace {

namespace {

// Index of FFT bin k of an n-point transform inside a 2n-point transform.
std::size_t padded_index(std::size_t k, std::size_t n) { return k < n / 2 ? k : k + n; }

Axis fine_axis(const Axis& ax) { return {ax.min, ax.max, 2 * ax.points}; }

}  // namespace

SpectralDensity::SpectralDensity(const Wavefunction& psi) : grid_(psi.grid), time_(psi.time) {
    const auto shape = fft::shape_of(grid_);
    for (auto n : shape) fine_.push_back(2 * n);
    std::size_t fine_total = 1;
    for (auto n : fine_) fine_total *= n;

    std::vector<cplx> spec = psi.amplitudes;
    fft::forward(spec, shape);

    std::vector<cplx> padded(fine_total);
    if (grid_.dims() == 1) {
        for (std::size_t k = 0; k < shape[0]; ++k) padded[padded_index(k, shape[0])] = spec[k];
    } else {
        for (std::size_t k0 = 0; k0 < shape[0]; ++k0)
            for (std::size_t k1 = 0; k1 < shape[1]; ++k1)
                padded[padded_index(k0, shape[0]) * fine_[1] + padded_index(k1, shape[1])] =
                    spec[k0 * shape[1] + k1];
    }
    fft::backward(padded, fine_);
    const double inv_n = 1.0 / static_cast<double>(grid_.size());
    for (auto& z : padded) z = cplx(std::norm(z * inv_n), 0.0);
    fft::forward(padded, fine_);
    const double inv_fine = 1.0 / static_cast<double>(fine_total);
    for (auto& z : padded) z *= inv_fine;
    coefficients_ = std::move(padded);
}

std::vector<cplx> SpectralDensity::interval_factors(std::size_t axis, double a, double b) const {
    const Axis ax = fine_axis(grid_.axis(axis));
    std::vector<cplx> out(ax.points);
    out[0] = b - a;
    for (std::size_t m = 1; m < ax.points; ++m) {
        const double q = ax.wavenumber(m);
        out[m] = (std::polar(1.0, q * (b - ax.min)) - std::polar(1.0, q * (a - ax.min))) / cplx(0.0, q);
    }
    return out;
}

double SpectralDensity::interval_mass(double a, double b) const {
    if (grid_.dims() != 1) throw InvalidArgument("interval_mass requires a 1D grid");
    const auto f = interval_factors(0, a, b);
    cplx acc = 0.0;
    for (std::size_t m = 0; m < f.size(); ++m) acc += coefficients_[m] * f[m];
    return acc.real();
}

double SpectralDensity::box_mass(const Point& lo, const Point& hi) const {
    if (grid_.dims() == 1) return interval_mass(lo[0], hi[0]);
    const auto f0 = interval_factors(0, lo[0], hi[0]);
    const auto f1 = interval_factors(1, lo[1], hi[1]);
    cplx acc = 0.0;
    for (std::size_t m = 0; m < f0.size(); ++m) {
        cplx row = 0.0;
        for (std::size_t l = 0; l < f1.size(); ++l) row += coefficients_[m * fine_[1] + l] * f1[l];
        acc += f0[m] * row;
    }
    return acc.real();
}

std::vector<double> SpectralDensity::cell_masses() const {
    // Cell integrals are the density coefficients times each cell's interval
    // factor, resummed at the cell origins: a backward transform on the fine
    // grid sampled at every other point.
    std::vector<std::vector<cplx>> factors;
    for (std::size_t a = 0; a < grid_.dims(); ++a) {
        const Axis& ax = grid_.axis(a);
        factors.push_back(interval_factors(a, ax.min, ax.min + ax.spacing()));
    }
    std::vector<cplx> g = coefficients_;
    if (grid_.dims() == 1) {
        for (std::size_t m = 0; m < g.size(); ++m) g[m] *= factors[0][m];
    } else {
        for (std::size_t m = 0; m < fine_[0]; ++m)
            for (std::size_t l = 0; l < fine_[1]; ++l) g[m * fine_[1] + l] *= factors[0][m] * factors[1][l];
    }
    fft::backward(g, fine_);
    std::vector<double> out(grid_.size());
    if (grid_.dims() == 1) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = g[2 * i].real();
    } else {
        const std::size_t n0 = grid_.axis(0).points, n1 = grid_.axis(1).points;
        for (std::size_t i = 0; i < n0; ++i)
            for (std::size_t j = 0; j < n1; ++j) out[i * n1 + j] = g[(2 * i) * fine_[1] + 2 * j].real();
    }
    return out;
}

std::vector<double> SpectralDensity::marginal_cell_masses(std::size_t axis) const {
    if (grid_.dims() == 1) return cell_masses();
    const std::size_t other = 1 - axis;
    const double other_extent = grid_.axis(other).extent();
    const Axis& ax = grid_.axis(axis);
    const std::size_t nf = fine_[axis];
    auto factor = interval_factors(axis, ax.min, ax.min + ax.spacing());
    std::vector<cplx> g(nf);
    for (std::size_t m = 0; m < nf; ++m) {
        const cplx c = axis == 0 ? coefficients_[m * fine_[1]] : coefficients_[m];
        g[m] = c * other_extent * factor[m];
    }
    fft::backward(g, {nf});
    std::vector<double> out(ax.points);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = g[2 * i].real();
    return out;
}

}  // namespace bohm::configspace
