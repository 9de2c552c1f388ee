#include "bohm/configspace/propagator.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bohm/configspace/fft.hpp"
#include "bohm/error.hpp"
#include "bohm/simd/kernels.hpp"

namespace bohm::configspace {

Propagator::Propagator(const Grid& grid, const Potential& potential, EvolutionConfig cfg)
    : grid_(grid), cfg_(cfg) {
    if (!(cfg_.dt > 0.0) || !std::isfinite(cfg_.dt)) throw InvalidArgument("evolution dt must be positive");
    if (!(cfg_.units.hbar > 0.0)) throw InvalidArgument("hbar must be positive");
    for (std::size_t a = 0; a < grid_.dims(); ++a)
        if (!(cfg_.units.mass[a] > 0.0))
            throw InvalidArgument("mass on axis " + std::to_string(a) + " must be positive");

    potential_ = sample_potential(potential, grid_, cfg_.units);
    kinetic_energy_.assign(grid_.size(), 0.0);
    for (std::size_t a = 0; a < grid_.dims(); ++a) {
        const auto k = grid_.wavenumbers(a);
        const double c = cfg_.units.hbar * cfg_.units.hbar / (2.0 * cfg_.units.mass[a]);
        for (std::size_t i = 0; i < k.size(); ++i) kinetic_energy_[i] += c * k[i] * k[i];
    }
    if (!(max_kinetic_phase() < std::numbers::pi))
        throw InvalidArgument("dt=" + std::to_string(cfg_.dt) + " gives a kinetic phase of " +
                              std::to_string(max_kinetic_phase()) +
                              " per step; must stay below pi to avoid spectral aliasing");
    half_potential_dt_ = potential_phase(0.5 * cfg_.dt);
    kinetic_dt_ = kinetic_phase(cfg_.dt);
}

double Propagator::max_kinetic_phase() const {
    double emax = 0.0;
    for (double e : kinetic_energy_) emax = std::max(emax, e);
    return emax * cfg_.dt / cfg_.units.hbar;
}

std::vector<cplx> Propagator::potential_phase(double h) const {
    std::vector<cplx> out(potential_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::polar(1.0, -potential_[i] * h / cfg_.units.hbar);
    return out;
}

std::vector<cplx> Propagator::kinetic_phase(double h) const {
    const double inv_n = 1.0 / static_cast<double>(grid_.size());
    std::vector<cplx> out(kinetic_energy_.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::polar(inv_n, -kinetic_energy_[i] * h / cfg_.units.hbar);
    return out;
}

void Propagator::apply(Wavefunction& psi, const std::vector<cplx>& half_potential,
                       const std::vector<cplx>& kinetic) const {
    const auto shape = fft::shape_of(grid_);
    simd::cmul_inplace(psi.amplitudes, half_potential);
    fft::forward(psi.amplitudes, shape);
    simd::cmul_inplace(psi.amplitudes, kinetic);
    fft::backward(psi.amplitudes, shape);
    simd::cmul_inplace(psi.amplitudes, half_potential);
}

void Propagator::step(Wavefunction& psi, double h) const {
    if (!(psi.grid == grid_)) throw InvalidArgument("wavefunction grid does not match propagator grid");
    if (h == cfg_.dt)
        apply(psi, half_potential_dt_, kinetic_dt_);
    else
        apply(psi, potential_phase(0.5 * h), kinetic_phase(h));
    psi.time += h;
}

Wavefunction Propagator::evolve(Wavefunction psi, double t_target) const {
    if (!(psi.grid == grid_)) throw InvalidArgument("wavefunction grid does not match propagator grid");
    if (!(t_target >= psi.time))
        throw InvalidArgument("evolve target time " + std::to_string(t_target) + " precedes state time " +
                              std::to_string(psi.time));
    const double t_start = psi.time;
    const double span = t_target - t_start;
    const double ratio = span / cfg_.dt;
    auto n_full = static_cast<std::size_t>(std::floor(ratio));
    if (std::abs(ratio - std::round(ratio)) < 1e-9) n_full = static_cast<std::size_t>(std::llround(ratio));

    const double cell = grid_.cell_volume();
    auto check = [&](std::size_t step) {
        if (!std::isfinite(simd::norm_sq_sum(psi.amplitudes) * cell)) throw NonFiniteError(step, psi.time);
    };
    for (std::size_t s = 0; s < n_full; ++s) {
        apply(psi, half_potential_dt_, kinetic_dt_);
        psi.time = t_start + static_cast<double>(s + 1) * cfg_.dt;
        check(s + 1);
    }
    const double rest = t_target - (t_start + static_cast<double>(n_full) * cfg_.dt);
    if (rest > 1e-12 * cfg_.dt) {
        apply(psi, potential_phase(0.5 * rest), kinetic_phase(rest));
        check(n_full + 1);
    }
    psi.time = t_target;
    return psi;
}

Wavefunction evolve(const Wavefunction& psi, const Potential& potential, const EvolutionConfig& cfg,
                    double t_target) {
    return Propagator(psi.grid, potential, cfg).evolve(psi, t_target);
}

}  // namespace bohm::configspace
