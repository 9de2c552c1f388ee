#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "bohm/configspace/propagator.hpp"
#include "bohm/configspace/spectral_density.hpp"

namespace bohm::configspace {

// Lazily evolved, cached wavefunction over [t_begin, t_end]. Snapshots live on
// a lattice t_begin + k * snapshot_interval (a whole number of solver steps);
// other times are reached from the nearest earlier snapshot with the same
// split-step scheme, shortened final step included. All accessors are safe to
// call concurrently; returned objects are immutable.
class WavefunctionHistory {
public:
    // snapshot_interval <= 0 selects the solver dt. Throws InvalidArgument if
    // the interval is not a whole multiple of dt or t_end < initial.time.
    WavefunctionHistory(Wavefunction initial, const Potential& potential, EvolutionConfig cfg, double t_end,
                        double snapshot_interval = 0.0);

    const Grid& grid() const { return propagator_.grid(); }
    const Propagator& propagator() const { return propagator_; }
    const EvolutionConfig& config() const { return propagator_.config(); }
    const Units& units() const { return propagator_.config().units; }
    double t_begin() const { return t_begin_; }
    double t_end() const { return t_end_; }
    double snapshot_interval() const { return interval_; }
    bool covers(double t) const;

    // Throws OutOfRange outside [t_begin, t_end].
    std::shared_ptr<const Wavefunction> at(double t) const;
    std::shared_ptr<const std::vector<double>> density_at(double t) const;
    std::shared_ptr<const SpectralDensity> spectral_density_at(double t) const;

    // Linear interpolation of the grid density at an arbitrary point.
    double density_at_point(const Point& x, double t) const;

private:
    std::shared_ptr<const Wavefunction> lattice(std::size_t k) const;

    Propagator propagator_;
    double t_begin_;
    double t_end_;
    double interval_;
    std::size_t stride_;

    mutable std::mutex mutex_;
    mutable std::vector<std::shared_ptr<const Wavefunction>> lattice_;
    mutable std::map<double, std::shared_ptr<const Wavefunction>> off_lattice_;
    mutable std::map<double, std::shared_ptr<const std::vector<double>>> densities_;
    mutable std::map<double, std::shared_ptr<const SpectralDensity>> spectra_;
};

// Multilinear interpolation of a grid field with periodic wrap.
double interpolate(const Grid& grid, const std::vector<double>& field, const Point& x);

}  // namespace bohm::configspace
