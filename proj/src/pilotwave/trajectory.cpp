#include "bohm/pilotwave/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "bohm/detail/text.hpp"

namespace bohm::pilotwave {

namespace {
constexpr std::size_t kMaxCachedFields = 16384;

std::string describe(const Point& x, std::size_t dims) {
    std::string s = "(" + std::to_string(x[0]);
    if (dims == 2) s += ", " + std::to_string(x[1]);
    return s + ")";
}
}  // namespace

NodePolicy NodePolicy::defaults(const Wavefunction& psi0, double duration) {
    NodePolicy p;
    p.node_epsilon = default_node_epsilon(psi0);
    double extent = 0.0;
    for (const auto& ax : psi0.grid.axes()) extent = std::max(extent, ax.extent());
    p.speed_cap = 100.0 * extent / (duration > 0.0 ? duration : 1.0);
    return p;
}

void NodePolicy::validate() const {
    if (!(node_epsilon > 0.0)) throw InvalidArgument("node_epsilon must be positive");
    if (!(speed_cap > 0.0)) throw InvalidArgument("speed_cap must be positive");
    if (!(substep_shrink > 0.0 && substep_shrink < 1.0)) throw InvalidArgument("substep_shrink must lie in (0, 1)");
    if (!(dt_min > 0.0)) throw InvalidArgument("dt_min must be positive");
}

NodeUnderflowError::NodeUnderflowError(double t, const Point& x, std::size_t dims)
    : Error("step size underflow at a persistent wavefunction node: t=" + std::to_string(t) +
            ", x=" + describe(x, dims)),
      t_(t),
      x_(x) {}

Point Trajectory::position_at(double t) const {
    if (times.empty()) throw OutOfRange("empty trajectory");
    const double tol = 1e-9 * std::max(1.0, std::abs(times.back()));
    if (t < times.front() - tol || t > times.back() + tol)
        throw OutOfRange("time " + std::to_string(t) + " outside trajectory range [" +
                         std::to_string(times.front()) + ", " + std::to_string(times.back()) + "]");
    if (t <= times.front()) return positions.front();
    if (t >= times.back()) return positions.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
    const std::size_t lo = hi - 1;
    const double f = (t - times[lo]) / (times[hi] - times[lo]);
    Point p{0.0, 0.0};
    for (std::size_t a = 0; a < dims; ++a) p[a] = (1.0 - f) * positions[lo][a] + f * positions[hi][a];
    return p;
}

void Trajectory::validate() const {
    if (times.empty() || times.size() != positions.size())
        throw InvalidArgument("trajectory needs matching, nonempty time and position lists");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw InvalidArgument("trajectory times must strictly increase");
}

PilotWave::PilotWave(std::shared_ptr<const WavefunctionHistory> history, double node_epsilon)
    : history_(std::move(history)), node_epsilon_(node_epsilon) {
    if (!history_) throw InvalidArgument("pilot wave needs a wavefunction history");
    if (!(node_epsilon_ > 0.0)) throw InvalidArgument("node_epsilon must be positive");
}

std::shared_ptr<const VelocityField> PilotWave::field_at(double t) const {
    auto psi = history_->at(t);
    {
        std::lock_guard lock(mutex_);
        if (auto it = fields_.find(psi->time); it != fields_.end()) return it->second;
    }
    auto field = std::make_shared<const VelocityField>(velocity_field(*psi, history_->units(), node_epsilon_));
    std::lock_guard lock(mutex_);
    if (fields_.size() >= kMaxCachedFields) fields_.clear();
    return fields_.emplace(psi->time, field).first->second;
}

std::vector<double> uniform_times(double t0, double t1, double interval) {
    if (!(interval > 0.0)) throw InvalidArgument("output interval must be positive");
    std::vector<double> out;
    const double ratio = (t1 - t0) / interval;
    auto n = static_cast<std::size_t>(std::floor(ratio + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) out.push_back(t0 + static_cast<double>(k) * interval);
    if (t1 - out.back() > 1e-9 * interval)
        out.push_back(t1);
    else
        out.back() = t1;
    return out;
}

namespace {

class Integrator {
public:
    Integrator(const PilotWave& source, const NodePolicy& policy)
        : source_(source), policy_(policy), dims_(source.grid().dims()) {}

    Point advance(const Point& x, double t, double h, bool refined) {
        NodeProximity worst = NodeProximity::clear;
        const Point next = rk4(x, t, h, worst);
        if (worst == NodeProximity::clear) return next;
        const double sub = h * policy_.substep_shrink;
        if (worst == NodeProximity::at_node) {
            if (sub < policy_.dt_min) throw NodeUnderflowError(t, x, dims_);
            return subdivide(x, t, h, sub);
        }
        if (refined || sub < policy_.dt_min) return next;
        return subdivide(x, t, h, sub);
    }

private:
    Point subdivide(Point x, double t, double h, double sub) {
        const auto m = static_cast<std::size_t>(std::ceil(1.0 / policy_.substep_shrink - 1e-12));
        for (std::size_t j = 0; j < m; ++j) {
            const double tj = t + static_cast<double>(j) * sub;
            const double hj = j + 1 == m ? (t + h) - tj : sub;
            if (hj <= 0.0) break;
            x = advance(x, tj, hj, true);
        }
        return x;
    }

    Point velocity(const Point& x, double t, NodeProximity& worst) {
        const auto s = source_.field_at(t)->interpolate(x);
        worst = std::max(worst, s.proximity);
        Point v = s.v;
        if (s.proximity != NodeProximity::clear)
            for (std::size_t a = 0; a < dims_; ++a) v[a] = std::clamp(v[a], -policy_.speed_cap, policy_.speed_cap);
        return v;
    }

    Point rk4(const Point& x, double t, double h, NodeProximity& worst) {
        auto shift = [&](const Point& base, const Point& k, double c) {
            Point p = base;
            for (std::size_t a = 0; a < dims_; ++a) p[a] += c * k[a];
            return p;
        };
        const double half = 0.5 * h;
        const Point k1 = velocity(x, t, worst);
        const Point k2 = velocity(shift(x, k1, half), t + half, worst);
        const Point k3 = velocity(shift(x, k2, half), t + half, worst);
        const Point k4 = velocity(shift(x, k3, h), t + h, worst);
        Point out = x;
        for (std::size_t a = 0; a < dims_; ++a) out[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        return source_.grid().wrap(out);
    }

    const PilotWave& source_;
    const NodePolicy& policy_;
    std::size_t dims_;
};

}  // namespace

Trajectory integrate_trajectory(const Point& x0, double t0, double t1, const PilotWave& source,
                                const NodePolicy& policy, const IntegrationOptions& options) {
    policy.validate();
    if (policy.node_epsilon != source.node_epsilon())
        throw InvalidArgument("node policy epsilon differs from the pilot wave's flagging threshold");
    if (!(t1 > t0)) throw InvalidArgument("trajectory end time must exceed start time");
    if (!(options.step > 0.0)) throw InvalidArgument("integration step must be positive");
    const auto& grid = source.grid();
    if (!grid.contains(x0)) throw InvalidArgument("seed position outside the grid");
    if (!source.history().covers(t0) || !source.history().covers(t1))
        throw OutOfRange("trajectory interval outside the evolved range");

    std::vector<double> outputs = options.output_times.empty() ? std::vector<double>{t0, t1} : options.output_times;
    const double tol = 1e-9 * std::max(1.0, std::abs(t1));
    if (std::abs(outputs.front() - t0) > tol || std::abs(outputs.back() - t1) > tol)
        throw InvalidArgument("output times must start at t0 and end at t1");
    outputs.front() = t0;
    outputs.back() = t1;
    for (std::size_t i = 1; i < outputs.size(); ++i)
        if (!(outputs[i] > outputs[i - 1])) throw InvalidArgument("output times must strictly increase");

    Trajectory traj;
    traj.dims = grid.dims();
    traj.times = outputs;
    traj.positions.reserve(outputs.size());
    traj.positions.push_back(x0);

    Integrator integrator(source, policy);
    Point x = x0;
    for (std::size_t seg = 1; seg < outputs.size(); ++seg) {
        const double ta = outputs[seg - 1], tb = outputs[seg];
        const double ratio = (tb - ta) / options.step;
        auto n_full = static_cast<std::size_t>(std::floor(ratio));
        if (std::abs(ratio - std::round(ratio)) < 1e-9) n_full = static_cast<std::size_t>(std::llround(ratio));
        for (std::size_t s = 0; s < n_full; ++s) {
            const double t = ta + static_cast<double>(s) * options.step;
            const double h = s + 1 == n_full && ratio - static_cast<double>(n_full) < 1e-9
                                 ? tb - t
                                 : options.step;
            x = integrator.advance(x, t, h, false);
        }
        const double done = ta + static_cast<double>(n_full) * options.step;
        if (tb - done > 1e-9 * options.step) x = integrator.advance(x, done, tb - done, false);
        traj.positions.push_back(x);
    }
    return traj;
}

double path_density_integral(const Trajectory& traj, const WavefunctionHistory& history) {
    double acc = 0.0;
    double prev = 0.0;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double rho = history.density_at_point(traj.positions[k], traj.times[k]);
        if (k > 0) acc += 0.5 * (traj.times[k] - traj.times[k - 1]) * (prev + rho);
        prev = rho;
    }
    return acc;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::optional<std::uint64_t> config_hash) {
    if (config_hash) out << "# config_hash=" << detail::format_hash(*config_hash) << '\n';
    out << (traj.dims == 1 ? "t,x\n" : "t,x,y\n");
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        out << detail::format_double(traj.times[k]) << ',' << detail::format_double(traj.positions[k][0]);
        if (traj.dims == 2) out << ',' << detail::format_double(traj.positions[k][1]);
        out << '\n';
    }
}

Trajectory read_trajectory_csv(std::istream& in) {
    Trajectory traj;
    std::string line;
    bool header = false;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto f = detail::split(line, ',');
        if (!header) {
            if (f.size() < 2 || f.size() > 3 || f[0] != "t") throw InvalidArgument("trajectory CSV needs a t,x[,y] header");
            traj.dims = f.size() - 1;
            header = true;
            continue;
        }
        ++row;
        if (f.size() != traj.dims + 1) throw InvalidArgument("trajectory CSV row " + std::to_string(row) + " has wrong arity");
        double t = 0.0;
        Point p{0.0, 0.0};
        bool ok = detail::parse_double(f[0], t);
        for (std::size_t a = 0; a < traj.dims; ++a) ok = ok && detail::parse_double(f[a + 1], p[a]);
        if (!ok) throw InvalidArgument("trajectory CSV row " + std::to_string(row) + " is not numeric");
        traj.times.push_back(t);
        traj.positions.push_back(p);
    }
    if (!header) throw InvalidArgument("trajectory CSV is empty");
    traj.validate();
    return traj;
}

}  // namespace bohm::pilotwave
