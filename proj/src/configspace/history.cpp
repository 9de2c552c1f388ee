#include "bohm/configspace/history.hpp"

#include <cmath>
#include <string>

#include "bohm/error.hpp"

namespace bohm::configspace {

namespace {
constexpr std::size_t kMaxOffLattice = 4096;
}

WavefunctionHistory::WavefunctionHistory(Wavefunction initial, const Potential& potential, EvolutionConfig cfg,
                                         double t_end, double snapshot_interval)
    : propagator_(initial.grid, potential, cfg), t_begin_(initial.time), t_end_(t_end) {
    if (!(t_end_ >= t_begin_)) throw InvalidArgument("history end time precedes the initial state");
    const double dt = propagator_.config().dt;
    if (snapshot_interval <= 0.0) snapshot_interval = dt;
    const double ratio = snapshot_interval / dt;
    stride_ = static_cast<std::size_t>(std::llround(ratio));
    if (stride_ == 0 || std::abs(ratio - static_cast<double>(stride_)) > 1e-9 * ratio)
        throw InvalidArgument("snapshot interval " + std::to_string(snapshot_interval) +
                              " is not a whole multiple of dt " + std::to_string(dt));
    interval_ = static_cast<double>(stride_) * dt;
    lattice_.push_back(std::make_shared<const Wavefunction>(std::move(initial)));
}

bool WavefunctionHistory::covers(double t) const {
    const double tol = 1e-9 * std::max(1.0, std::abs(t_end_));
    return t >= t_begin_ - tol && t <= t_end_ + tol;
}

std::shared_ptr<const Wavefunction> WavefunctionHistory::lattice(std::size_t k) const {
    // caller holds mutex_
    while (lattice_.size() <= k) {
        const std::size_t next = lattice_.size();
        const double t_next = t_begin_ + static_cast<double>(next) * interval_;
        lattice_.push_back(std::make_shared<const Wavefunction>(propagator_.evolve(*lattice_.back(), t_next)));
    }
    return lattice_[k];
}

std::shared_ptr<const Wavefunction> WavefunctionHistory::at(double t) const {
    if (!covers(t))
        throw OutOfRange("time " + std::to_string(t) + " outside evolved range [" + std::to_string(t_begin_) +
                         ", " + std::to_string(t_end_) + "]");
    const double u = std::max(0.0, (t - t_begin_) / interval_);
    const double k_near = std::round(u);
    std::lock_guard lock(mutex_);
    if (std::abs(u - k_near) < 1e-9) return lattice(static_cast<std::size_t>(k_near));
    if (auto it = off_lattice_.find(t); it != off_lattice_.end()) return it->second;
    auto base = lattice(static_cast<std::size_t>(std::floor(u)));
    auto psi = std::make_shared<const Wavefunction>(propagator_.evolve(*base, t));
    if (off_lattice_.size() >= kMaxOffLattice) off_lattice_.clear();
    off_lattice_.emplace(t, psi);
    return psi;
}

std::shared_ptr<const std::vector<double>> WavefunctionHistory::density_at(double t) const {
    {
        std::lock_guard lock(mutex_);
        if (auto it = densities_.find(t); it != densities_.end()) return it->second;
    }
    auto rho = std::make_shared<const std::vector<double>>(density(*at(t)));
    std::lock_guard lock(mutex_);
    if (densities_.size() >= kMaxOffLattice) densities_.clear();
    return densities_.emplace(t, rho).first->second;
}

std::shared_ptr<const SpectralDensity> WavefunctionHistory::spectral_density_at(double t) const {
    {
        std::lock_guard lock(mutex_);
        if (auto it = spectra_.find(t); it != spectra_.end()) return it->second;
    }
    auto spec = std::make_shared<const SpectralDensity>(*at(t));
    std::lock_guard lock(mutex_);
    return spectra_.emplace(t, spec).first->second;
}

double WavefunctionHistory::density_at_point(const Point& x, double t) const {
    return interpolate(grid(), *density_at(t), x);
}

double interpolate(const Grid& grid, const std::vector<double>& field, const Point& x) {
    std::size_t idx[2][2];
    double frac[2] = {0.0, 0.0};
    for (std::size_t a = 0; a < grid.dims(); ++a) {
        const Axis& ax = grid.axis(a);
        const double u = (ax.wrap(x[a]) - ax.min) / ax.spacing();
        const double base = std::floor(u);
        frac[a] = u - base;
        const auto i0 = static_cast<std::size_t>(base) % ax.points;
        idx[a][0] = i0;
        idx[a][1] = (i0 + 1) % ax.points;
    }
    if (grid.dims() == 1) return (1.0 - frac[0]) * field[idx[0][0]] + frac[0] * field[idx[0][1]];
    double acc = 0.0;
    for (int c0 = 0; c0 < 2; ++c0)
        for (int c1 = 0; c1 < 2; ++c1) {
            const double w = (c0 ? frac[0] : 1.0 - frac[0]) * (c1 ? frac[1] : 1.0 - frac[1]);
            acc += w * field[grid.index(idx[0][c0], idx[1][c1])];
        }
    return acc;
}

}  // namespace bohm::configspace
