#pragma once

#include <vector>

#include "bohm/configspace/wavefunction.hpp"

namespace bohm::configspace {

// |psi|^2 as the trigonometric polynomial it is when psi is the band-limited
// interpolant of its grid samples. Region integrals are then evaluated in
// closed form from the Fourier coefficients, so interval and cell masses are
// exact up to rounding rather than limited by a quadrature rule.
class SpectralDensity {
public:
    explicit SpectralDensity(const Wavefunction& psi);

    const Grid& grid() const { return grid_; }
    double time() const { return time_; }

    // Integral of |psi|^2 over [a, b) (1D).
    double interval_mass(double a, double b) const;
    // Integral over [lo[0], hi[0]) x [lo[1], hi[1]) (2D; 1D ignores axis 1).
    double box_mass(const Point& lo, const Point& hi) const;

    // Mass of every grid cell [x_i, x_i + dx) (x [y_j, y_j + dy)), flattened.
    std::vector<double> cell_masses() const;
    // Mass of the slabs [x_i, x_i + dx) along `axis`, integrated over the
    // other axis.
    std::vector<double> marginal_cell_masses(std::size_t axis) const;

private:
    std::vector<cplx> interval_factors(std::size_t axis, double a, double b) const;

    Grid grid_;
    double time_ = 0.0;
    std::vector<std::size_t> fine_;   // 2n per axis
    std::vector<cplx> coefficients_;  // row-major over fine_
};

}  // namespace bohm::configspace
