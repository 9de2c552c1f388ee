#include "bohm/configspace/wavefunction.hpp"

#include <cmath>

#include "bohm/error.hpp"
#include "bohm/simd/kernels.hpp"

namespace bohm::configspace {

double Wavefunction::norm() const {
    return simd::norm_sq_sum(amplitudes) * grid.cell_volume();
}

void Wavefunction::normalize() {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("cannot normalize a zero or non-finite state");
    simd::scale_inplace(amplitudes, 1.0 / std::sqrt(n));
}

std::vector<double> density(const Wavefunction& psi) {
    std::vector<double> rho(psi.amplitudes.size());
    simd::abs_sq(psi.amplitudes, rho);
    return rho;
}

double mean_position(const Wavefunction& psi, std::size_t axis) {
    const auto rho = density(psi);
    double acc = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) acc += psi.grid.point(i)[axis] * rho[i];
    return acc * psi.grid.cell_volume();
}

double position_variance(const Wavefunction& psi, std::size_t axis) {
    const auto rho = density(psi);
    const double mu = mean_position(psi, axis);
    double acc = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double d = psi.grid.point(i)[axis] - mu;
        acc += d * d * rho[i];
    }
    return acc * psi.grid.cell_volume();
}

}  // namespace bohm::configspace
