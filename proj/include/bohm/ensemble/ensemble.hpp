#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bohm/pilotwave/trajectory.hpp"
#include "json.hpp"

namespace bohm::ensemble {

using configspace::Grid;
using configspace::Wavefunction;
using configspace::WavefunctionHistory;
using pilotwave::IntegrationOptions;
using pilotwave::NodePolicy;
using pilotwave::PilotWave;
using pilotwave::Trajectory;

// |psi(x, t0)|^2 of the state being sampled.
struct QuantumDensity {};

// Nonnegative values tabulated at the grid points (row-major, axis 0
// slowest). Normalized on use; cell i carries mass values[i] / sum.
struct CustomDensity {
    std::vector<double> values;
};

struct InitialDensity {
    std::variant<QuantumDensity, CustomDensity> kind;

    bool is_quantum() const { return std::holds_alternative<QuantumDensity>(kind); }
    std::string name() const { return is_quantum() ? "quantum" : "custom"; }
};

// Probability of each grid cell [x_i, x_i + dx) under the density. Quantum
// masses are exact integrals of the band-limited |psi|^2. Throws
// InvalidArgument for a negative, non-finite, mis-sized or all-zero table.
std::vector<double> cell_probabilities(const InitialDensity& density, const Wavefunction& psi);

// Inverse-CDF draw over the cells with uniform jitter inside the cell; in 2D
// the row (axis 0) is drawn from the marginal and the column from the row's
// conditional. Point k uses counter stream k of `seed`.
std::vector<Point> sample_initial(const InitialDensity& density, const Wavefunction& psi, std::size_t n,
                                  std::uint64_t seed);

struct Ensemble {
    std::vector<Trajectory> trajectories;
    std::uint64_t seed = 0;
    InitialDensity density;

    std::size_t size() const { return trajectories.size(); }
    std::size_t dims() const { return trajectories.front().dims; }
    const std::vector<double>& times() const { return trajectories.front().times; }
    // Positions of every member at t (linear interpolation between samples).
    std::vector<Point> positions_at(double t) const;
    // Throws InvalidArgument if empty or the time grids differ.
    void validate() const;
};

struct TrajectoryFailure {
    std::size_t index;
    double time;
    Point position;
};

// Raised after the whole ensemble was attempted when some members hit a
// persistent node. The surviving members are kept in `partial()`, with
// their original indices in `survivors()`.
class EnsembleNodeError : public Error {
public:
    EnsembleNodeError(std::vector<TrajectoryFailure> failures, Ensemble partial, std::vector<std::size_t> survivors);
    const std::vector<TrajectoryFailure>& failures() const { return failures_; }
    const Ensemble& partial() const { return partial_; }
    const std::vector<std::size_t>& survivors() const { return survivors_; }

private:
    std::vector<TrajectoryFailure> failures_;
    Ensemble partial_;
    std::vector<std::size_t> survivors_;
};

// Integrates every point over [t0, t1] on the shared output grid. Members are
// independent; `threads` > 1 spreads them over worker threads without
// changing any result.
Ensemble evolve_ensemble(const std::vector<Point>& points, double t0, double t1, const PilotWave& source,
                         const NodePolicy& policy, const IntegrationOptions& options, unsigned threads = 1);

struct EquivarianceReport {
    std::size_t dims = 1;
    std::size_t samples = 0;
    double threshold = 0.0;  // 1.63 / sqrt(N), the 1% KS level
    std::vector<double> times;
    // Per time, D_N per axis (1D uses entry 0).
    std::vector<std::array<double, 2>> statistic;
    std::vector<bool> pass;

    double max_statistic(std::size_t k) const;
    bool all_pass() const;
    nlohmann::json to_json() const;
};

// Kolmogorov-Smirnov distance between sorted samples and a CDF given as
// exact cell masses on [origin, origin + dx * masses.size()), linear inside
// each cell.
double ks_statistic(std::vector<double> samples, double origin, double dx, const std::vector<double>& masses);

// Compares the ensemble's positions with |psi(x, t)|^2 at each time; in 2D
// each axis marginal is tested separately and both must pass.
EquivarianceReport equivariance_test(const Ensemble& ens, const WavefunctionHistory& history,
                                     const std::vector<double>& times);

// Member with the largest path density integral; ties go to the lowest index.
std::pair<std::size_t, double> select_max_density_trajectory(const Ensemble& ens,
                                                             const WavefunctionHistory& history);

// CSV with columns traj_id,t,x[,y], one row per member per output time.
void write_ensemble_csv(std::ostream& out, const Ensemble& ens, std::optional<std::uint64_t> config_hash = {});
Ensemble read_ensemble_csv(std::istream& in);

nlohmann::json ensemble_manifest(const Ensemble& ens, std::optional<std::uint64_t> config_hash = {});

}  // namespace bohm::ensemble
