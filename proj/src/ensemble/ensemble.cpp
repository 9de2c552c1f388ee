#include "bohm/ensemble/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <istream>
#include <ostream>
#include <thread>

#include "bohm/configspace/spectral_density.hpp"
#include "bohm/detail/overloaded.hpp"
#include "bohm/detail/random.hpp"
#include "bohm/detail/text.hpp"

namespace bohm::ensemble {

namespace {

std::vector<double> cumulative(const double* masses, std::size_t n) {
    std::vector<double> c(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) c[i] = acc += masses[i];
    return c;
}

// Index of the cell whose cumulative bracket contains u * total.
std::size_t pick(const std::vector<double>& cum, std::size_t begin, std::size_t end, double u) {
    const double first = begin == 0 ? 0.0 : cum[begin - 1];
    const double target = first + u * (cum[end - 1] - first);
    const auto it = std::upper_bound(cum.begin() + static_cast<std::ptrdiff_t>(begin),
                                     cum.begin() + static_cast<std::ptrdiff_t>(end), target);
    std::size_t i = static_cast<std::size_t>(it - cum.begin());
    if (i >= end) i = end - 1;
    // Never land on an empty cell when rounding put the target on a plateau.
    while (i > begin && cum[i] == (i == 0 ? 0.0 : cum[i - 1])) --i;
    return i;
}

}  // namespace

std::vector<double> cell_probabilities(const InitialDensity& density, const Wavefunction& psi) {
    std::vector<double> masses = std::visit(
        detail::overloaded{
            [&](const QuantumDensity&) { return configspace::SpectralDensity(psi).cell_masses(); },
            [&](const CustomDensity& c) {
                if (c.values.size() != psi.grid.size())
                    throw InvalidArgument("custom density has " + std::to_string(c.values.size()) +
                                          " values for a grid of " + std::to_string(psi.grid.size()) + " points");
                for (double v : c.values)
                    if (!std::isfinite(v) || v < 0.0)
                        throw InvalidArgument("custom density must be finite and nonnegative");
                return c.values;
            },
        },
        density.kind);
    // Exact quadrature of a nonnegative density can still round slightly below zero.
    double total = 0.0;
    for (auto& m : masses) total += m = std::max(m, 0.0);
    if (!(total > 0.0)) throw InvalidArgument("initial density is identically zero");
    for (auto& m : masses) m /= total;
    return masses;
}

std::vector<Point> sample_initial(const InitialDensity& density, const Wavefunction& psi, std::size_t n,
                                  std::uint64_t seed) {
    if (n == 0) throw InvalidArgument("sample count must be at least 1");
    const Grid& g = psi.grid;
    const auto masses = cell_probabilities(density, psi);
    std::vector<Point> out(n, Point{0.0, 0.0});

    if (g.dims() == 1) {
        const auto cum = cumulative(masses.data(), masses.size());
        const auto& ax = g.axis(0);
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t i = pick(cum, 0, cum.size(), detail::uniform01(seed, k, 0));
            out[k][0] = ax.coord(i) + ax.spacing() * detail::uniform01(seed, k, 1);
        }
        return out;
    }

    const auto& a0 = g.axis(0);
    const auto& a1 = g.axis(1);
    std::vector<double> rows(a0.points, 0.0);
    for (std::size_t i = 0; i < a0.points; ++i)
        for (std::size_t j = 0; j < a1.points; ++j) rows[i] += masses[g.index(i, j)];
    const auto row_cum = cumulative(rows.data(), rows.size());
    // Per-row cumulative sums laid out flat so pick() can search each row.
    std::vector<double> cell_cum(masses.size());
    {
        double acc = 0.0;
        for (std::size_t f = 0; f < masses.size(); ++f) cell_cum[f] = acc += masses[f];
    }
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = pick(row_cum, 0, row_cum.size(), detail::uniform01(seed, k, 0));
        const std::size_t base = g.index(i, 0);
        const std::size_t f = pick(cell_cum, base, base + a1.points, detail::uniform01(seed, k, 2));
        const std::size_t j = f - base;
        out[k][0] = a0.coord(i) + a0.spacing() * detail::uniform01(seed, k, 1);
        out[k][1] = a1.coord(j) + a1.spacing() * detail::uniform01(seed, k, 3);
    }
    return out;
}

std::vector<Point> Ensemble::positions_at(double t) const {
    std::vector<Point> out;
    out.reserve(trajectories.size());
    for (const auto& tr : trajectories) out.push_back(tr.position_at(t));
    return out;
}

void Ensemble::validate() const {
    if (trajectories.empty()) throw InvalidArgument("ensemble is empty");
    for (const auto& tr : trajectories) {
        tr.validate();
        if (tr.dims != dims() || tr.times != times())
            throw InvalidArgument("ensemble members must share dimension and output times");
    }
}

EnsembleNodeError::EnsembleNodeError(std::vector<TrajectoryFailure> failures, Ensemble partial,
                                     std::vector<std::size_t> survivors)
    : Error(std::to_string(failures.size()) + " ensemble member(s) stopped at a node; first is trajectory " +
            std::to_string(failures.front().index) + " at t=" + std::to_string(failures.front().time)),
      failures_(std::move(failures)),
      partial_(std::move(partial)),
      survivors_(std::move(survivors)) {}

Ensemble evolve_ensemble(const std::vector<Point>& points, double t0, double t1, const PilotWave& source,
                         const NodePolicy& policy, const IntegrationOptions& options, unsigned threads) {
    if (points.empty()) throw InvalidArgument("ensemble needs at least one point");
    const std::size_t n = points.size();
    std::vector<std::optional<Trajectory>> done(n);
    std::vector<std::optional<TrajectoryFailure>> failed(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                done[i] = pilotwave::integrate_trajectory(points[i], t0, t1, source, policy, options);
            } catch (const pilotwave::NodeUnderflowError& e) {
                failed[i] = TrajectoryFailure{i, e.time(), e.position()};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    Ensemble ens;
    std::vector<TrajectoryFailure> failures;
    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < n; ++i) {
        if (failed[i]) {
            failures.push_back(*failed[i]);
        } else {
            ens.trajectories.push_back(std::move(*done[i]));
            survivors.push_back(i);
        }
    }
    if (!failures.empty()) throw EnsembleNodeError(std::move(failures), std::move(ens), std::move(survivors));
    return ens;
}

double EquivarianceReport::max_statistic(std::size_t k) const {
    return dims == 1 ? statistic[k][0] : std::max(statistic[k][0], statistic[k][1]);
}

bool EquivarianceReport::all_pass() const {
    return std::all_of(pass.begin(), pass.end(), [](bool b) { return b; });
}

nlohmann::json EquivarianceReport::to_json() const {
    nlohmann::json j;
    j["dims"] = dims;
    j["N"] = samples;
    j["threshold"] = threshold;
    j["times"] = times;
    auto& d = j["D_N"] = nlohmann::json::array();
    for (const auto& s : statistic) {
        if (dims == 1) d.push_back(s[0]);
        else d.push_back({s[0], s[1]});
    }
    j["pass"] = pass;
    j["all_pass"] = all_pass();
    return j;
}

double ks_statistic(std::vector<double> samples, double origin, double dx, const std::vector<double>& masses) {
    if (samples.empty()) throw InvalidArgument("KS statistic needs samples");
    std::sort(samples.begin(), samples.end());
    double total = 0.0;
    for (double m : masses) total += m;
    std::vector<double> below(masses.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        below[i] = acc / total;
        acc += masses[i];
    }
    const double n = static_cast<double>(samples.size());
    const auto last = static_cast<double>(masses.size() - 1);
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double u = std::clamp((samples[i] - origin) / dx, 0.0, static_cast<double>(masses.size()));
        const double c = std::min(std::floor(u), last);
        const auto ci = static_cast<std::size_t>(c);
        const double cdf = std::clamp(below[ci] + (u - c) * masses[ci] / total, 0.0, 1.0);
        d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
    }
    return d;
}

EquivarianceReport equivariance_test(const Ensemble& ens, const WavefunctionHistory& history,
                                     const std::vector<double>& times) {
    ens.validate();
    EquivarianceReport rep;
    rep.dims = ens.dims();
    rep.samples = ens.size();
    rep.threshold = 1.63 / std::sqrt(static_cast<double>(ens.size()));
    const Grid& g = history.grid();
    for (double t : times) {
        if (t < ens.times().front() || t > ens.times().back())
            throw OutOfRange("equivariance time " + std::to_string(t) + " outside the ensemble's range");
        const auto pos = ens.positions_at(t);
        const auto spec = history.spectral_density_at(t);
        std::array<double, 2> d{0.0, 0.0};
        for (std::size_t a = 0; a < rep.dims; ++a) {
            std::vector<double> xs(pos.size());
            for (std::size_t i = 0; i < pos.size(); ++i) xs[i] = pos[i][a];
            const auto masses = rep.dims == 1 ? spec->cell_masses() : spec->marginal_cell_masses(a);
            d[a] = ks_statistic(std::move(xs), g.axis(a).min, g.axis(a).spacing(), masses);
        }
        rep.times.push_back(t);
        rep.statistic.push_back(d);
        rep.pass.push_back(std::max(d[0], d[1]) < rep.threshold);
    }
    return rep;
}

std::pair<std::size_t, double> select_max_density_trajectory(const Ensemble& ens,
                                                             const WavefunctionHistory& history) {
    if (ens.trajectories.empty()) throw InvalidArgument("cannot select from an empty ensemble");
    std::size_t best = 0;
    double value = pilotwave::path_density_integral(ens.trajectories[0], history);
    for (std::size_t i = 1; i < ens.size(); ++i) {
        const double v = pilotwave::path_density_integral(ens.trajectories[i], history);
        if (v > value) {
            value = v;
            best = i;
        }
    }
    return {best, value};
}

void write_ensemble_csv(std::ostream& out, const Ensemble& ens, std::optional<std::uint64_t> config_hash) {
    ens.validate();
    if (config_hash) out << "# config_hash=" << detail::format_hash(*config_hash) << '\n';
    out << (ens.dims() == 1 ? "traj_id,t,x\n" : "traj_id,t,x,y\n");
    for (std::size_t i = 0; i < ens.size(); ++i) {
        const auto& tr = ens.trajectories[i];
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            out << i << ',' << detail::format_double(tr.times[k]) << ',' << detail::format_double(tr.positions[k][0]);
            if (tr.dims == 2) out << ',' << detail::format_double(tr.positions[k][1]);
            out << '\n';
        }
    }
}

Ensemble read_ensemble_csv(std::istream& in) {
    Ensemble ens;
    std::size_t dims = 0;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto f = detail::split(line, ',');
        if (dims == 0) {
            if (f.size() < 3 || f.size() > 4 || f[0] != "traj_id" || f[1] != "t")
                throw InvalidArgument("ensemble CSV needs a traj_id,t,x[,y] header");
            dims = f.size() - 2;
            continue;
        }
        ++row;
        const std::string where = "ensemble CSV row " + std::to_string(row);
        if (f.size() != dims + 2) throw InvalidArgument(where + " has wrong arity");
        double id = 0.0, t = 0.0;
        Point p{0.0, 0.0};
        bool ok = detail::parse_double(f[0], id) && detail::parse_double(f[1], t);
        for (std::size_t a = 0; a < dims; ++a) ok = ok && detail::parse_double(f[a + 2], p[a]);
        if (!ok) throw InvalidArgument(where + " is not numeric");
        const auto n = ens.trajectories.size();
        if (id == static_cast<double>(n)) {
            ens.trajectories.push_back(Trajectory{dims, {}, {}});
        } else if (n == 0 || id != static_cast<double>(n - 1)) {
            throw InvalidArgument(where + ": traj_id must run 0, 1, 2, ... in blocks");
        }
        ens.trajectories.back().times.push_back(t);
        ens.trajectories.back().positions.push_back(p);
    }
    if (dims == 0) throw InvalidArgument("ensemble CSV is empty");
    ens.validate();
    return ens;
}

nlohmann::json ensemble_manifest(const Ensemble& ens, std::optional<std::uint64_t> config_hash) {
    ens.validate();
    nlohmann::json j;
    if (config_hash) j["config_hash"] = detail::format_hash(*config_hash);
    j["seed"] = ens.seed;
    j["N"] = ens.size();
    j["dims"] = ens.dims();
    j["density"] = ens.density.name();
    j["t0"] = ens.times().front();
    j["t1"] = ens.times().back();
    j["output_times"] = ens.times().size();
    return j;
}

}  // namespace bohm::ensemble
