#pragma once

#include <cstddef>
#include <vector>

#include "bohm/configspace/potential.hpp"
#include "bohm/configspace/wavefunction.hpp"

namespace bohm::configspace {

struct EvolutionConfig {
    double dt = 1.0e-3;
    Units units{};
};

// Symmetric (Strang) split-step Fourier propagator on a periodic grid:
// half potential phase, full kinetic phase in the spectral domain, half
// potential phase. Each step is exactly unitary up to rounding.
class Propagator {
public:
    // Throws InvalidArgument if dt <= 0, a mass or hbar is not positive, or the
    // largest kinetic phase per step reaches pi (spectral aliasing).
    Propagator(const Grid& grid, const Potential& potential, EvolutionConfig cfg);

    const Grid& grid() const { return grid_; }
    const EvolutionConfig& config() const { return cfg_; }
    const std::vector<double>& potential_values() const { return potential_; }

    // Largest kinetic phase accumulated in one step of length dt.
    double max_kinetic_phase() const;

    // One split step of length h; h may be negative (time reversal) or
    // shorter than dt. Advances psi.time by h.
    void step(Wavefunction& psi, double h) const;

    // Repeated full steps of dt, then one shortened step landing exactly on
    // t_target. Throws InvalidArgument if t_target < psi.time and
    // NonFiniteError naming the step if an amplitude stops being finite.
    Wavefunction evolve(Wavefunction psi, double t_target) const;

private:
    void apply(Wavefunction& psi, const std::vector<cplx>& half_potential,
               const std::vector<cplx>& kinetic) const;
    std::vector<cplx> potential_phase(double h) const;
    std::vector<cplx> kinetic_phase(double h) const;

    Grid grid_;
    EvolutionConfig cfg_;
    std::vector<double> potential_;
    std::vector<double> kinetic_energy_;  // per FFT bin
    std::vector<cplx> half_potential_dt_;
    std::vector<cplx> kinetic_dt_;  // includes the 1/N of the inverse transform
};

// Convenience wrapper constructing a Propagator for one call.
Wavefunction evolve(const Wavefunction& psi, const Potential& potential, const EvolutionConfig& cfg,
                    double t_target);

}  // namespace bohm::configspace
