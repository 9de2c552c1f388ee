#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "bohm/configspace/history.hpp"
#include "bohm/error.hpp"
#include "bohm/pilotwave/velocity.hpp"

namespace bohm::pilotwave {

using configspace::WavefunctionHistory;

// Guards the integrator needs where the exact flow is undefined.
struct NodePolicy {
    double node_epsilon = 1e-12;  // density threshold for flagging
    double speed_cap = 1e3;       // |v| clamp per component near nodes
    double substep_shrink = 0.5;  // step factor applied near nodes
    double dt_min = 1e-9;         // smallest step before giving up

    // node_epsilon = 1e-12 * peak density, speed_cap = 100 * extent / duration.
    static NodePolicy defaults(const Wavefunction& psi0, double duration);
    // Throws InvalidArgument unless all fields are positive and shrink < 1.
    void validate() const;
};

// Persistent node: the step could not be shrunk enough to get clear of it.
class NodeUnderflowError : public Error {
public:
    NodeUnderflowError(double t, const Point& x, std::size_t dims);
    double time() const noexcept { return t_; }
    const Point& position() const noexcept { return x_; }

private:
    double t_;
    Point x_;
};

// Time-sampled path through configuration space.
struct Trajectory {
    std::size_t dims = 1;
    std::vector<double> times;
    std::vector<Point> positions;

    Point seed() const { return positions.front(); }
    double t_begin() const { return times.front(); }
    double t_end() const { return times.back(); }
    // Linear interpolation between adjacent samples; OutOfRange outside.
    Point position_at(double t) const;
    // Throws InvalidArgument unless times strictly increase and sizes match.
    void validate() const;
};

// The evolution context trajectories are integrated against: a shared
// wavefunction history plus cached velocity fields. Safe for concurrent use.
class PilotWave {
public:
    PilotWave(std::shared_ptr<const WavefunctionHistory> history, double node_epsilon);

    const WavefunctionHistory& history() const { return *history_; }
    std::shared_ptr<const WavefunctionHistory> history_ptr() const { return history_; }
    double node_epsilon() const { return node_epsilon_; }
    const Grid& grid() const { return history_->grid(); }

    std::shared_ptr<const VelocityField> field_at(double t) const;

private:
    std::shared_ptr<const WavefunctionHistory> history_;
    double node_epsilon_;
    mutable std::mutex mutex_;
    mutable std::map<double, std::shared_ptr<const VelocityField>> fields_;
};

struct IntegrationOptions {
    double step = 0.01;                // RK4 step
    std::vector<double> output_times;  // sorted; empty means {t0, t1}
};

// Output grid t0, t0 + interval, ..., t1 (t1 always included).
std::vector<double> uniform_times(double t0, double t1, double interval);

// Classical RK4 on dx/dt = v(x, t). Steps land exactly on every output time.
// A step whose stencil touches a flagged node is redone as substeps of
// step * substep_shrink, recursively, with speeds clamped to speed_cap; once
// below dt_min a stencil entirely inside flagged points raises
// NodeUnderflowError.
Trajectory integrate_trajectory(const Point& x0, double t0, double t1, const PilotWave& source,
                                const NodePolicy& policy, const IntegrationOptions& options);

// Trapezoidal time integral of |psi(x(t), t)|^2 along the trajectory samples.
double path_density_integral(const Trajectory& traj, const WavefunctionHistory& history);

// CSV with columns t,x[,y] and an optional `# config_hash=` comment line.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          std::optional<std::uint64_t> config_hash = {});
Trajectory read_trajectory_csv(std::istream& in);

}  // namespace bohm::pilotwave
