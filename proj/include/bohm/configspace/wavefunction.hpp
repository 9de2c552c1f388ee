#pragma once

#include <complex>
#include <vector>

#include "bohm/configspace/grid.hpp"

namespace bohm::configspace {

using cplx = std::complex<double>;

// Physical constants of the model. Defaults are natural units.
struct Units {
    std::array<double, 2> mass{1.0, 1.0};  // per coordinate axis
    double hbar = 1.0;
};

// Complex amplitudes on a grid at one instant. Values are treated as
// immutable once an operation hands them out.
struct Wavefunction {
    Grid grid;
    std::vector<cplx> amplitudes;
    double time = 0.0;

    // sum |psi|^2 * cell volume
    double norm() const;
    // Rescales so that norm() == 1; throws InvalidArgument for a zero state.
    void normalize();
};

// Pointwise |psi|^2.
std::vector<double> density(const Wavefunction& psi);

// Quadrature expectation of coordinate `axis`.
double mean_position(const Wavefunction& psi, std::size_t axis = 0);
// Quadrature variance of coordinate `axis`.
double position_variance(const Wavefunction& psi, std::size_t axis = 0);

}  // namespace bohm::configspace
