// Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "bohm/configspace/recipes.hpp"
#include "bohm/ensemble/ensemble.hpp"
#include "bohm/inference/inference.hpp"
#include "bohm/perception/perception.hpp"
#include "bohm/pilotwave/trajectory.hpp"
#include "bohm/runner/run.hpp"
#include "oracles.hpp"

using namespace bohm::configspace;
using namespace bohm::pilotwave;
using bohm::Point;
namespace ens = bohm::ensemble;
namespace perc = bohm::perception;
namespace inf = bohm::inference;
namespace runner = bohm::runner;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(int id, const char* name, bool pass, const std::string& detail, double secs) {
    std::printf("[%s] %2d %-28s %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, name, detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

StateRecipe gaussian(double c, double w, double k) { return {GaussianRecipe{{c, 0.0}, w, {k, 0.0}}}; }
StateRecipe ho_ground() { return {EigenstateRecipe{HarmonicPotential{1.0}, {0, 0}}}; }

struct Wave {
    Wavefunction psi0;
    std::shared_ptr<WavefunctionHistory> history;
    NodePolicy policy;
    std::shared_ptr<PilotWave> pilot;
};

Wave wave(const Grid& grid, const StateRecipe& recipe, const Potential& v, double t_end, double dt, double snap) {
    Wave w{make_state(grid, recipe), nullptr, {}, nullptr};
    w.policy = NodePolicy::defaults(w.psi0, t_end);
    w.history = std::make_shared<WavefunctionHistory>(w.psi0, v, EvolutionConfig{dt, {}}, t_end, snap);
    w.pilot = std::make_shared<PilotWave>(w.history, w.policy.node_epsilon);
    return w;
}

double normal_cdf(double x, double sigma) { return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2)); }

// KS distance of samples from the closed-form free-packet density at t.
double ks_closed_form(std::vector<double> xs, double t) {
    std::sort(xs.begin(), xs.end());
    const double s = oracle::free_width(1.0, t);
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = normal_cdf(xs[i], s);
        d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
    }
    return d;
}

// The typicality definition read literally.
std::vector<double> brute_typicality(const std::vector<double>& w, const std::vector<double>& m) {
    double total = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) total += w[j] * m[j];
    std::vector<double> t(m.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] == 0.0) continue;
        double below = 0.0;
        for (std::size_t j = 0; j < m.size(); ++j)
            if (m[j] <= m[i]) below += w[j] * m[j];
        t[i] = below / total;
    }
    return t;
}

void criterion1() {
    const auto t0 = Clock::now();
    const Grid grid = Grid::line(-16.0, 16.0, 512);
    auto psi = make_state(grid, gaussian(-2.0, 1.0, 1.5));
    const Propagator prop(grid, FreePotential{}, EvolutionConfig{1e-3, {}});
    for (int k = 0; k < 10000; ++k) prop.step(psi, 1e-3);
    const double secs = seconds_since(t0);
    double sum = 0.0;
    for (const auto& a : psi.amplitudes) sum += std::norm(a);
    const double drift = std::abs(sum * grid.cell_volume() - 1.0);
    verdict(1, "unitarity", drift < 1e-10 && secs < 5.0,
            fmt("|norm-1| = %.2e after 1e4 steps", drift) + fmt(", limit 1e-10 and 5 s", 0), secs);
}

// Ensembles of criterion 2, reused by criterion 4.
struct FreeEnsembles {
    Wave w;
    std::vector<ens::Ensemble> members;
};

FreeEnsembles criterion2() {
    const auto t0 = Clock::now();
    FreeEnsembles fe{wave(Grid::line(-16.0, 16.0, 512), gaussian(0.0, 1.0, 0.0), FreePotential{}, 2.0, 1e-3, 5e-3), {}};
    const IntegrationOptions opt{0.01, {0.0, 0.5, 1.0, 1.5, 2.0}};
    const std::vector<double> times{0.5, 1.0, 2.0};
    const std::size_t n = 10000;
    const double threshold = 1.63 / std::sqrt(static_cast<double>(n));
    int pass_lib = 0, pass_oracle = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto pts = ens::sample_initial({ens::QuantumDensity{}}, fe.w.psi0, n, seed);
        auto e = ens::evolve_ensemble(pts, 0.0, 2.0, *fe.w.pilot, fe.w.policy, opt);
        const auto report = ens::equivariance_test(e, *fe.w.history, times);
        pass_lib += report.all_pass();
        bool ok = true;
        for (double t : times) {
            std::vector<double> xs;
            for (const auto& p : e.positions_at(t)) xs.push_back(p[0]);
            const double d = ks_closed_form(xs, t);
            worst = std::max(worst, d);
            ok = ok && d < threshold;
        }
        pass_oracle += ok;
        fe.members.push_back(std::move(e));
    }
    const double secs = seconds_since(t0);
    verdict(2, "equivariance (KS)", pass_lib >= 19 && pass_oracle >= 19 && secs < 120.0,
            std::to_string(pass_lib) + "/20 seeds pass (grid CDF), " + std::to_string(pass_oracle) +
                "/20 (closed-form CDF)" + fmt(", worst D_N %.4f", worst) + fmt(" vs %.4f", threshold),
            secs);
    return fe;
}

void criterion3() {
    const auto t0 = Clock::now();
    const auto w = wave(Grid::line(-10.0, 10.0, 256), ho_ground(), HarmonicPotential{1.0}, 10.0, 1e-4, 5e-3);
    const IntegrationOptions opt{0.01, uniform_times(0.0, 10.0, 0.1)};
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double x0 = -3.0 + 6.0 * i / 99.0;
        const auto traj = integrate_trajectory({x0, 0.0}, 0.0, 10.0, *w.pilot, w.policy, opt);
        for (const auto& p : traj.positions) worst = std::max(worst, std::abs(p[0] - x0));
    }
    verdict(3, "static trajectories", worst < 1e-6, fmt("max displacement %.2e over 100 x [0,10]", worst),
            seconds_since(t0));
}

void criterion4(const FreeEnsembles& fe) {
    const auto t0 = Clock::now();
    const Grid& grid = fe.w.history->grid();
    perc::FamilySpec spec;
    spec.times = {0.5, 1.0, 2.0};
    spec.edges[0] = perc::uniform_edges(grid.axis(0), 64);
    const auto family = perc::build_perception_family(grid, spec);
    std::vector<double> sqm;
    for (const auto& p : family.perceptions()) sqm.push_back(perc::sqm_measure_density(p, *fe.w.history));
    std::size_t within = 0, total = 0;
    double worst_seed = 1.0;
    for (const auto& e : fe.members) {
        const double n = static_cast<double>(e.size());
        std::size_t ok = 0;
        for (std::size_t i = 0; i < family.size(); ++i) {
            const double m = perc::scbm_measure_density(family.at(i), e).m;
            const double se = std::sqrt(sqm[i] * (1.0 - sqm[i]) / n);
            // <= only matters for empty tail cells, where both m are 0 and se = 0.
            ok += std::abs(m - sqm[i]) <= 3.0 * se;
        }
        worst_seed = std::min(worst_seed, static_cast<double>(ok) / static_cast<double>(family.size()));
        within += ok;
        total += family.size();
    }
    const double pooled = static_cast<double>(within) / static_cast<double>(total);
    verdict(4, "SCBM = SQM measure", worst_seed >= 0.95,
            fmt("pooled %.4f", pooled) + fmt(", worst seed %.4f of 192 cells within 3 SE", worst_seed), seconds_since(t0));
}

void criterion5() {
    const auto t0 = Clock::now();
    SuperpositionRecipe mix;
    mix.terms.push_back({cplx(1.0 / std::sqrt(2.0)), ho_ground()});
    mix.terms.push_back({cplx(1.0 / std::sqrt(2.0)), {EigenstateRecipe{HarmonicPotential{1.0}, {1, 0}}}});
    const auto w = wave(Grid::line(-10.0, 10.0, 256), {mix}, HarmonicPotential{1.0}, 4.0, 1e-3, 5e-3);
    const IntegrationOptions opt{0.01, uniform_times(0.0, 4.0, 0.05)};
    const auto e = ens::evolve_ensemble(ens::sample_initial({ens::QuantumDensity{}}, w.psi0, 200, 3), 0.0, 4.0,
                                        *w.pilot, w.policy, opt);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double eps = w.policy.node_epsilon;
    int inside = 0, counterexamples = 0;
    double smallest = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 1000; ++k) {
        const auto& traj = e.trajectories[rng() % e.size()];
        const double t = e.times()[rng() % e.times().size()];
        const double width = 0.01 + 0.99 * u(rng);
        double lo;
        if (k % 2 == 0) lo = traj.position_at(t)[0] - width * u(rng);
        else lo = -10.0 + (20.0 - width) * u(rng);
        const perc::Perception p{"q" + std::to_string(k), t, perc::Region::intervals({{lo, lo + width}}), 1.0};
        const double sbm = perc::sbm_measure_density(p, traj);
        if (sbm != 1.0) continue;
        ++inside;
        const double sqm = perc::sqm_measure_density(p, *w.history);
        smallest = std::min(smallest, sqm / width);
        if (sqm <= eps * width) ++counterexamples;
    }
    verdict(5, "support inclusion", counterexamples == 0 && inside > 0,
            std::to_string(counterexamples) + " counterexamples in 1000 triples (" + std::to_string(inside) +
                fmt(" with SBM m = 1, min SQM m/|s| %.2e)", smallest),
            seconds_since(t0));
}

void criterion6() {
    const auto t0 = Clock::now();
    const auto w = wave(Grid::line(-16.0, 16.0, 512), gaussian(0.2, 1.0, 0.7), FreePotential{}, 1.0, 1e-3, 5e-3);
    perc::FamilySpec spec;
    spec.times = {0.5, 1.0};
    spec.edges[0] = {-16.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 16.0};
    const auto family = perc::build_perception_family(w.history->grid(), spec);
    const IntegrationOptions opt{0.01, {0.0, 0.5, 1.0}};
    std::size_t within = 0, rows = 0;
    int diverging = 0;
    double worst = 1.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto pts = ens::sample_initial({ens::QuantumDensity{}}, w.psi0, 10000, seed);
        const auto e = ens::evolve_ensemble(pts, 0.0, 1.0, *w.pilot, w.policy, opt);
        const auto report = inf::typicality_agreement_experiment(family, w.history, e, 3);
        for (const auto& r : report.rows) within += r.within;
        rows += report.rows.size();
        worst = std::min(worst, report.fraction_within());
        for (const auto& s : report.sbm) diverging += s.diverges;
    }
    const double frac = static_cast<double>(within) / static_cast<double>(rows);
    verdict(6, "typicality agreement", frac >= 0.95 && diverging >= 1,
            fmt("SCBM within band for %.4f", frac) + fmt(" (worst seed %.4f)", worst) + ", " +
                std::to_string(diverging) + "/15 SBM theories diverge",
            seconds_since(t0));
}

void criterion7() {
    const auto t0 = Clock::now();
    // Dyadic values make every partial sum exact, so equality is bitwise.
    std::mt19937_64 rng(17);
    std::size_t families = 0, mismatches = 0;
    for (std::size_t size = 1; size <= 10; ++size) {
        for (int trial = 0; trial < 2000; ++trial) {
            std::vector<double> w(size), m(size);
            for (std::size_t i = 0; i < size; ++i) {
                w[i] = static_cast<double>(1 + rng() % 16) / 8.0;
                m[i] = static_cast<double>(rng() % 9) / 64.0;  // ties and zeros are common
            }
            if (std::all_of(m.begin(), m.end(), [](double v) { return v == 0.0; })) m[0] = 1.0 / 64.0;
            ++families;
            mismatches += inf::typicality_values(w, m) != brute_typicality(w, m);
        }
    }
    // Full pipeline on ensemble theories with N = 1024 (dyadic m = k/N) and
    // dyadic prior weights.
    const auto wv = wave(Grid::line(-16.0, 16.0, 512), gaussian(0.3, 1.0, 0.4), FreePotential{}, 1.0, 1e-3, 5e-3);
    const IntegrationOptions opt{0.01, {0.0, 0.5, 1.0}};
    const auto e = ens::evolve_ensemble(ens::sample_initial({ens::QuantumDensity{}}, wv.psi0, 1024, 21), 0.0, 1.0,
                                        *wv.pilot, wv.policy, opt);
    const auto scbm = perc::TheoryModel::scbm(wv.history, e);
    const auto sbm = perc::TheoryModel::sbm(wv.history, e.trajectories[0]);
    const auto sqm = perc::TheoryModel::sqm(wv.history);
    double sqm_dev = 0.0;
    std::size_t pipeline = 0;
    for (std::size_t cells = 1; cells <= 10; ++cells) {
        for (int variant = 0; variant < 3; ++variant) {
            perc::FamilySpec spec;
            spec.times = {variant == 0 ? 0.5 : 1.0};
            spec.edges[0] = {-16.0};
            for (std::size_t c = 1; c < cells; ++c)
                spec.edges[0].push_back(-2.5 + 5.0 * static_cast<double>(c) / static_cast<double>(cells) + 0.1 * variant);
            spec.edges[0].push_back(16.0);
            for (std::size_t c = 0; c < cells; ++c) spec.priors.push_back(static_cast<double>(1 + rng() % 8) / 4.0);
            const auto family = perc::build_perception_family(wv.history->grid(), spec);
            for (const auto* theory : {&scbm, &sbm, &sqm}) {
                std::vector<double> w, m;
                for (const auto& p : family.perceptions()) {
                    w.push_back(p.prior_weight);
                    m.push_back(perc::measure_density(p, *theory).m);
                }
                const auto expect = brute_typicality(w, m);
                const auto report = inf::typicality(family, *theory);
                ++pipeline;
                for (std::size_t i = 0; i < family.size(); ++i) {
                    const double got = report.entries[i].typicality;
                    if (theory == &sqm) {
                        sqm_dev = std::max(sqm_dev, std::abs(got - expect[i]));
                        // Which perceptions count towards T is exact.
                        for (std::size_t j = 0; j < family.size(); ++j)
                            if ((m[j] <= m[i]) != (report.entries[j].m <= report.entries[i].m)) ++mismatches;
                    } else if (got != expect[i]) {
                        ++mismatches;
                    }
                }
            }
        }
    }
    verdict(7, "typicality brute force", mismatches == 0 && sqm_dev <= 1e-15,
            std::to_string(families) + " dyadic families + " + std::to_string(pipeline) +
                " theory families, |S| <= 10: " + std::to_string(mismatches) + " mismatches" +
                fmt(", SQM real-valued max diff %.1e", sqm_dev),
            seconds_since(t0));
}

void criterion8() {
    const auto t0 = Clock::now();
    const auto w = wave(Grid::line(-16.0, 16.0, 512), gaussian(0.0, 1.0, 0.0), FreePotential{}, 2.0, 1e-3, 1e-3);
    auto end = [&](double h) {
        return integrate_trajectory({1.0, 0.0}, 0.0, 2.0, *w.pilot, w.policy, IntegrationOptions{h, {}})
            .positions.back()[0];
    };
    const double exact = oracle::free_width(1.0, 2.0);
    const double err = std::abs(end(0.01) - exact);
    const double h = 0.2;
    const double ref = end(h / 8.0);
    const double ratio = std::abs(end(h) - ref) / std::abs(end(h / 2.0) - ref);
    verdict(8, "trajectory accuracy", err < 1e-3 && ratio > 12.0 && ratio < 20.0,
            fmt("|x(2) - sqrt(2)| = %.2e", err) + fmt(", error ratio on halving %.2f", ratio), seconds_since(t0));
}

void criterion9() {
    const auto t0 = Clock::now();
    const double t_end = 2.0;
    const auto w = wave(Grid::line(-10.0, 10.0, 256), ho_ground(), HarmonicPotential{1.0}, t_end, 1e-4, 5e-3);
    auto pts = ens::sample_initial({ens::QuantumDensity{}}, w.psi0, 200, 9);
    pts.insert(pts.begin() + 77, Point{0.0, 0.0});
    const auto e = ens::evolve_ensemble(pts, 0.0, t_end, *w.pilot, w.policy, IntegrationOptions{0.01, uniform_times(0.0, t_end, 0.05)});
    const auto [index, value] = ens::select_max_density_trajectory(e, *w.history);
    std::size_t brute = 0, closed = 0;
    double best = -1.0, best_closed = -1.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double v = path_density_integral(e.trajectories[i], *w.history);
        if (v > best) best = v, brute = i;
        // Static trajectory: T |phi0(x0)|^2.
        const double x0 = e.trajectories[i].seed()[0];
        const double c = t_end * oracle::ho0(x0) * oracle::ho0(x0);
        if (c > best_closed) best_closed = c, closed = i;
    }
    const double expected = t_end / std::sqrt(std::numbers::pi);
    const bool pass = index == 77 && e.trajectories[index].seed()[0] == 0.0 && brute == index && best == value &&
                      closed == index && std::abs(value - expected) < 1e-6;
    verdict(9, "max-density selection", pass,
            "selected member " + std::to_string(index) + fmt(" (x0 = %g)", e.trajectories[index].seed()[0]) +
                ", brute force " + std::to_string(brute) + fmt(", integral %.9f", value) + fmt(" vs %.9f", expected),
            seconds_since(t0));
}

std::string without_wall_time(const std::string& manifest) {
    auto j = nlohmann::json::parse(manifest);
    j.erase("wall_time_s");
    return j.dump();
}

void criterion10() {
    const auto t0 = Clock::now();
    std::vector<fs::path> configs;
    for (const auto& entry : fs::directory_iterator(fs::path(BOHM_SOURCE_DIR) / "configs"))
        if (entry.path().extension() == ".json") configs.push_back(entry.path());
    std::sort(configs.begin(), configs.end());
    const fs::path base = fs::temp_directory_path() / "bohmlab_acceptance";
    fs::remove_all(base);
    std::size_t files = 0, differing = 0;
    // Same config, same output directory: the second run replaces the first.
    auto snapshot = [](const fs::path& dir) {
        std::map<std::string, std::string> out;
        for (const auto& entry : fs::directory_iterator(dir))
            out[entry.path().filename().string()] = runner::read_file(entry.path());
        return out;
    };
    for (const auto& cfg : configs) {
        runner::RunOptions opt;
        opt.out_dir = base / cfg.stem();
        runner::run(cfg, opt);
        const auto first = snapshot(*opt.out_dir);
        runner::run(cfg, opt);
        const auto second = snapshot(*opt.out_dir);
        if (first.size() != second.size()) ++differing;
        for (const auto& [name, a] : first) {
            ++files;
            const auto it = second.find(name);
            const bool same = it != second.end() && (name == "manifest.json" ? without_wall_time(a) == without_wall_time(it->second)
                                                                                 : a == it->second);
            if (!same) {
                ++differing;
                std::printf("       differs: %s/%s\n", cfg.stem().c_str(), name.c_str());
            }
        }
    }
    fs::remove_all(base);
    verdict(10, "determinism", differing == 0 && !configs.empty(),
            std::to_string(configs.size()) + " shipped configs run twice, " + std::to_string(files) + " files, " +
                std::to_string(differing) + " differ (manifest compared without wall_time_s)",
            seconds_since(t0));
}

}  // namespace

int main() {
    try {
        criterion1();
        const auto fe = criterion2();
        criterion3();
        criterion4(fe);
        criterion5();
        criterion6();
        criterion7();
        criterion8();
        criterion9();
        criterion10();
    } catch (const std::exception& e) {
        std::printf("[FAIL] aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
