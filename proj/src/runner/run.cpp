#include "bohm/runner/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "bohm/configspace/history.hpp"
#include "bohm/configspace/io.hpp"
#include "bohm/detail/text.hpp"
#include "bohm/ensemble/ensemble.hpp"
#include "bohm/inference/inference.hpp"
#include "bohm/perception/perception.hpp"
#include "bohm/pilotwave/trajectory.hpp"
#include "bohm/runner/plots.hpp"

namespace bohm::runner {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace configspace;
using ensemble::Ensemble;
using pilotwave::Trajectory;
using perception::PerceptionSet;
using perception::TheoryModel;

ExperimentConfig apply_options(ExperimentConfig c, const RunOptions& options) {
    if (options.out_dir) c.output.dir = options.out_dir->string();
    if (options.seed) c.seed = *options.seed;
    if (options.threads) {
        if (*options.threads == 0) throw ConfigError({{std::nullopt, "threads", "must be at least 1"}});
        c.ensemble.threads = *options.threads;
    }
    return c;
}

namespace {

std::string hash_line(std::uint64_t h) { return "# config_hash=" + detail::format_hash(h) + "\n"; }

std::string json_file(json j, std::uint64_t h) {
    j["config_hash"] = detail::format_hash(h);
    return j.dump(2) + "\n";
}

template <class Writer>
std::string capture(Writer&& w) {
    std::ostringstream out;
    w(out);
    return out.str();
}

ensemble::InitialDensity make_density(const DensitySpec& d, const Grid& grid) {
    if (d.type == "custom") return {ensemble::CustomDensity{d.values}};
    if (d.type == "gaussian") {
        std::vector<double> values(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Point x = grid.point(i);
            double r2 = 0.0;
            for (std::size_t a = 0; a < grid.dims(); ++a) r2 += (x[a] - d.center[a]) * (x[a] - d.center[a]);
            values[i] = std::exp(-r2 / (2.0 * d.width * d.width));
        }
        return {ensemble::CustomDensity{std::move(values)}};
    }
    return {ensemble::QuantumDensity{}};
}

// Shared numerical state of one experiment; ensembles are built on demand.
class Context {
public:
    explicit Context(const ExperimentConfig& c) : cfg(c), grid(c.make_grid()), hash(config_hash(c)), psi0(make_state(grid, c.state, c.units)) {
        history = std::make_shared<WavefunctionHistory>(psi0, c.potential, EvolutionConfig{c.evolution.dt, c.units},
                                                        c.evolution.t_end, c.evolution.snapshot_interval);
        const auto rho = density(psi0);
        const double peak = *std::max_element(rho.begin(), rho.end());
        const auto& np = c.trajectories.node_policy;
        policy = pilotwave::NodePolicy::defaults(psi0, c.evolution.t_end);
        policy.node_epsilon = np.node_epsilon_rel * peak;
        if (np.speed_cap > 0.0) policy.speed_cap = np.speed_cap;
        policy.substep_shrink = np.substep_shrink;
        policy.dt_min = np.dt_min;
        policy.validate();
        pilot = std::make_unique<pilotwave::PilotWave>(history, policy.node_epsilon);
        perceptions = build_perceptions(c);

        options.step = c.trajectories.step;
        options.output_times = output_times();
    }

    Trajectory trajectory(const Point& x0) const {
        return pilotwave::integrate_trajectory(x0, 0.0, cfg.evolution.t_end, *pilot, policy, options);
    }

    Ensemble evolve(const ensemble::InitialDensity& density, bool with_include) const {
        auto points = ensemble::sample_initial(density, psi0, cfg.ensemble.n, cfg.seed);
        if (with_include) points.insert(points.end(), cfg.ensemble.include.begin(), cfg.ensemble.include.end());
        auto ens = ensemble::evolve_ensemble(points, 0.0, cfg.evolution.t_end, *pilot, policy, options,
                                             cfg.ensemble.threads);
        ens.seed = cfg.seed;
        ens.density = density;
        return ens;
    }

    const Ensemble& ensemble() {
        if (!ens_) ens_ = evolve(make_density(cfg.ensemble.density, grid), true);
        return *ens_;
    }

    std::vector<std::pair<TheoryModel, double>> theories() {
        std::vector<std::pair<TheoryModel, double>> out;
        if (cfg.theories.empty()) out.emplace_back(TheoryModel::sqm(history), 1.0);
        for (const auto& t : cfg.theories) {
            if (t.type == "SQM") out.emplace_back(TheoryModel::sqm(history), t.prior);
            else if (t.type == "SBM")
                out.emplace_back(TheoryModel::sbm(history, t.member ? ensemble().trajectories.at(*t.member) : trajectory(*t.x0)),
                                 t.prior);
            else if (t.type == "SCBM") out.emplace_back(TheoryModel::scbm(history, ensemble()), t.prior);
            else out.emplace_back(TheoryModel::gcbm(history, evolve(make_density(*t.density, grid), false)), t.prior);
        }
        return out;
    }

    const ExperimentConfig& cfg;
    Grid grid;
    std::uint64_t hash;
    Wavefunction psi0;
    std::shared_ptr<WavefunctionHistory> history;
    pilotwave::NodePolicy policy;
    std::unique_ptr<pilotwave::PilotWave> pilot;
    PerceptionSet perceptions;
    pilotwave::IntegrationOptions options;

private:
    // The regular output grid plus every perception and check time, so
    // trajectories are sampled exactly where they are evaluated.
    std::vector<double> output_times() const {
        const double t_end = cfg.evolution.t_end;
        auto times = pilotwave::uniform_times(0.0, t_end, cfg.trajectories.output_interval);
        std::vector<double> extra = cfg.equivariance_times;
        for (double t : perceptions.times()) extra.push_back(t);
        const double tol = 1e-9 * std::max(1.0, t_end);
        for (double t : extra) {
            auto it = std::find_if(times.begin(), times.end(), [&](double u) { return std::abs(u - t) <= tol; });
            if (it != times.end()) {
                if (it != times.begin() && std::next(it) != times.end()) *it = t;
            } else {
                times.insert(std::upper_bound(times.begin(), times.end(), t), t);
            }
        }
        return times;
    }

    std::optional<Ensemble> ens_;
};

std::string tag_lower(const std::string& tag) {
    std::string s;
    for (char ch : tag) s += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

std::vector<double> axis_coords(const Axis& a) {
    std::vector<double> x(a.points);
    for (std::size_t i = 0; i < a.points; ++i) x[i] = a.coord(i);
    return x;
}

// Density along axis 0 (the x marginal in 2D).
std::vector<double> x_profile(const Wavefunction& psi) {
    const auto rho = density(psi);
    if (psi.grid.dims() == 1) return rho;
    const auto& a0 = psi.grid.axis(0);
    const auto& a1 = psi.grid.axis(1);
    std::vector<double> out(a0.points, 0.0);
    for (std::size_t i = 0; i < a0.points; ++i)
        for (std::size_t j = 0; j < a1.points; ++j) out[i] += rho[psi.grid.index(i, j)] * a1.spacing();
    return out;
}

void add(RunResult& r, std::string name, std::string content) { r.files.push_back({std::move(name), std::move(content)}); }

void plot(RunResult& r, Context& ctx, const std::string& stem, const std::vector<Series>& series,
          const std::string& columns, const std::string& title, const std::string& xl, const std::string& yl) {
    add(r, stem + ".dat", gnuplot_blocks(series, columns, ctx.hash));
    if (ctx.cfg.output.svg) add(r, stem + ".svg", svg_line_plot(series, title, xl, yl, ctx.hash));
}

void run_evolve(Context& ctx, RunResult& r) {
    const auto& c = ctx.cfg;
    std::vector<double> times = c.evolution.output_times;
    if (times.empty()) times = {0.0, c.evolution.t_end};
    std::vector<Series> series;
    json dumps = json::array();
    for (std::size_t k = 0; k < times.size(); ++k) {
        const auto psi = ctx.history->at(times[k]);
        const std::string name = "wavefunction_" + std::to_string(k) + ".csv";
        add(r, name, capture([&](std::ostream& o) { write_csv(o, *psi, ctx.hash); }));
        series.push_back({"t=" + detail::format_double(times[k]), axis_coords(ctx.grid.axis(0)), x_profile(*psi)});
        dumps.push_back({{"t", times[k]}, {"file", name}, {"norm", psi->norm()}});
    }
    plot(r, ctx, "density", series, c.dims() == 1 ? "x rho" : "x rho_x (marginal)", "Density", "x", "density");

    const auto steps = static_cast<std::size_t>(std::llround(c.evolution.t_end / c.evolution.snapshot_interval));
    std::string norms = hash_line(ctx.hash) + "t,norm\n";
    double drift = 0.0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = std::min(static_cast<double>(k) * c.evolution.snapshot_interval, c.evolution.t_end);
        const double n = ctx.history->at(t)->norm();
        drift = std::max(drift, std::abs(n - 1.0));
        norms += detail::format_double(t) + "," + detail::format_double(n) + "\n";
    }
    add(r, "norm.csv", norms);
    r.summary = {{"wavefunctions", dumps}, {"max_norm_drift", drift}};
}

void run_trajectories(Context& ctx, RunResult& r) {
    std::vector<Series> series;
    json rows = json::array();
    for (std::size_t i = 0; i < ctx.cfg.trajectories.x0.size(); ++i) {
        const auto traj = ctx.trajectory(ctx.cfg.trajectories.x0[i]);
        const std::string name = "trajectory_" + std::to_string(i) + ".csv";
        add(r, name, capture([&](std::ostream& o) { pilotwave::write_trajectory_csv(o, traj, ctx.hash); }));
        Series s{"x0=" + detail::format_double(traj.seed()[0]), {}, {}};
        for (std::size_t k = 0; k < traj.times.size(); ++k) {
            s.x.push_back(traj.dims == 1 ? traj.times[k] : traj.positions[k][0]);
            s.y.push_back(traj.dims == 1 ? traj.positions[k][0] : traj.positions[k][1]);
        }
        series.push_back(std::move(s));
        json seed = json::array(), last = json::array();
        for (std::size_t a = 0; a < traj.dims; ++a) {
            seed.push_back(traj.seed()[a]);
            last.push_back(traj.positions.back()[a]);
        }
        rows.push_back({{"file", name},
                        {"x0", seed},
                        {"final", last},
                        {"path_density_integral", pilotwave::path_density_integral(traj, *ctx.history)}});
    }
    const bool line = ctx.cfg.dims() == 1;
    plot(r, ctx, "trajectories", series, line ? "t x" : "x y", "Bohmian trajectories", line ? "t" : "x", line ? "x" : "y");
    r.summary = {{"trajectories", rows}};
}

void run_equivariance(Context& ctx, RunResult& r) {
    const auto& ens = ctx.ensemble();
    const auto report = ensemble::equivariance_test(ens, *ctx.history, ctx.cfg.equivariance_times);
    add(r, "ensemble.csv", capture([&](std::ostream& o) { ensemble::write_ensemble_csv(o, ens, ctx.hash); }));
    add(r, "ensemble_manifest.json", json_file(ensemble::ensemble_manifest(ens, ctx.hash), ctx.hash));
    add(r, "equivariance.json", json_file(report.to_json(), ctx.hash));
    std::vector<Series> series;
    for (std::size_t a = 0; a < report.dims; ++a) {
        Series s{"D_N axis " + std::to_string(a), report.times, {}};
        for (const auto& st : report.statistic) s.y.push_back(st[a]);
        series.push_back(std::move(s));
    }
    series.push_back({"threshold", report.times, std::vector<double>(report.times.size(), report.threshold)});
    plot(r, ctx, "ks", series, "t D_N", "Kolmogorov-Smirnov distance", "t", "D_N");
    r.summary = {{"samples", report.samples}, {"threshold", report.threshold}, {"all_pass", report.all_pass()}};
}

void run_perceptions(Context& ctx, RunResult& r) {
    const auto theories = ctx.theories();
    std::vector<perception::MeasureRow> rows;
    std::vector<Series> series;
    json totals = json::array();
    for (const auto& [theory, prior] : theories) {
        const auto table = perception::measure_table(ctx.perceptions, theory);
        Series s{theory.tag(), {}, {}};
        double total = 0.0;
        for (std::size_t i = 0; i < table.size(); ++i) {
            s.x.push_back(static_cast<double>(i));
            s.y.push_back(table[i].value.m);
            total += table[i].value.m;
        }
        totals.push_back({{"theory", theory.tag()}, {"sum_m", total}});
        series.push_back(std::move(s));
        rows.insert(rows.end(), table.begin(), table.end());
    }
    add(r, "perceptions.json", json_file(perception::to_json(ctx.perceptions), ctx.hash));
    add(r, "measures.csv", capture([&](std::ostream& o) { perception::write_measure_csv(o, rows, ctx.hash); }));
    plot(r, ctx, "measures", series, "perception_index m", "Measure density per perception", "perception", "m");
    r.summary = {{"perceptions", ctx.perceptions.size()}, {"theories", totals}};
}

void run_typicality(Context& ctx, RunResult& r) {
    const auto agreement = inference::typicality_agreement_experiment(ctx.perceptions, ctx.history, ctx.ensemble(),
                                                                      ctx.cfg.sbm_members);
    add(r, "agreement.csv", capture([&](std::ostream& o) { inference::write_agreement_csv(o, agreement, ctx.hash); }));
    add(r, "agreement.json", json_file(agreement.to_json(), ctx.hash));
    json reports = json::array();
    if (!ctx.cfg.theories.empty()) {
        const auto theories = ctx.theories();
        for (std::size_t i = 0; i < theories.size(); ++i) {
            const auto report = inference::typicality(ctx.perceptions, theories[i].first);
            const std::string name = "typicality_" + std::to_string(i) + "_" + tag_lower(report.theory) + ".csv";
            add(r, name, capture([&](std::ostream& o) { inference::write_typicality_csv(o, report, ctx.hash); }));
            reports.push_back({{"theory", report.theory}, {"file", name}});
        }
    }
    Series sqm{"SQM", {}, {}}, scbm{"SCBM", {}, {}};
    for (std::size_t i = 0; i < agreement.rows.size(); ++i) {
        sqm.x.push_back(static_cast<double>(i));
        sqm.y.push_back(agreement.rows[i].t_sqm);
        scbm.x.push_back(static_cast<double>(i));
        scbm.y.push_back(agreement.rows[i].t_scbm);
    }
    plot(r, ctx, "typicality", {sqm, scbm}, "perception_index T", "Typicality", "perception", "T");
    r.summary = {{"fraction_within", agreement.fraction_within()},
                 {"max_deviation", agreement.max_deviation()},
                 {"sbm_divergence", agreement.sbm_divergence()},
                 {"reports", reports}};
}

void run_compare(Context& ctx, RunResult& r) {
    const auto cmp = inference::compare_theories(ctx.cfg.observed, ctx.perceptions, ctx.theories());
    add(r, "comparison.csv", capture([&](std::ostream& o) { inference::write_comparison_csv(o, cmp, ctx.hash); }));
    add(r, "comparison.json", json_file(cmp.to_json(), ctx.hash));
    r.summary = cmp.to_json();
}

std::string path_integral_csv(const Ensemble& ens, const WavefunctionHistory& history, std::uint64_t hash,
                              std::vector<double>& values) {
    std::string out = hash_line(hash) + (ens.dims() == 1 ? "traj_id,x0,integral\n" : "traj_id,x0,y0,integral\n");
    values.clear();
    for (std::size_t i = 0; i < ens.size(); ++i) {
        const auto& tr = ens.trajectories[i];
        values.push_back(pilotwave::path_density_integral(tr, history));
        out += std::to_string(i);
        for (std::size_t a = 0; a < ens.dims(); ++a) out += "," + detail::format_double(tr.seed()[a]);
        out += "," + detail::format_double(values.back()) + "\n";
    }
    return out;
}

json selection_json(const Ensemble& ens, std::size_t index, double value) {
    json seed = json::array();
    for (std::size_t a = 0; a < ens.dims(); ++a) seed.push_back(ens.trajectories[index].seed()[a]);
    return {{"index", index}, {"integral", value}, {"x0", seed}, {"members", ens.size()}};
}

void run_select(Context& ctx, RunResult& r) {
    const auto& ens = ctx.ensemble();
    const auto [index, value] = ensemble::select_max_density_trajectory(ens, *ctx.history);
    std::vector<double> values;
    add(r, "path_integrals.csv", path_integral_csv(ens, *ctx.history, ctx.hash, values));
    add(r, "selection.json", json_file(selection_json(ens, index, value), ctx.hash));
    add(r, "selected_trajectory.csv",
        capture([&](std::ostream& o) { pilotwave::write_trajectory_csv(o, ens.trajectories[index], ctx.hash); }));
    r.summary = selection_json(ens, index, value);
}

}  // namespace

RunResult execute(const ExperimentConfig& c) {
    Context ctx(c);
    RunResult r;
    r.config = c;
    r.hash = ctx.hash;
    if (c.experiment == "evolve") run_evolve(ctx, r);
    else if (c.experiment == "trajectories") run_trajectories(ctx, r);
    else if (c.experiment == "equivariance") run_equivariance(ctx, r);
    else if (c.experiment == "perceptions") run_perceptions(ctx, r);
    else if (c.experiment == "typicality") run_typicality(ctx, r);
    else if (c.experiment == "compare") run_compare(ctx, r);
    else if (c.experiment == "select-trajectory") run_select(ctx, r);
    else throw InvalidArgument("unknown experiment '" + c.experiment + "'");
    return r;
}

RunResult replay(const ExperimentConfig& c, const std::string& csv_text) {
    Context ctx(c);
    RunResult r;
    r.config = c;
    r.hash = ctx.hash;

    Ensemble ens;
    std::string source = "ensemble";
    try {
        std::istringstream in(csv_text);
        ens = ensemble::read_ensemble_csv(in);
    } catch (const Error&) {
        std::istringstream in(csv_text);
        ens.trajectories.push_back(pilotwave::read_trajectory_csv(in));
        source = "trajectory";
    }
    ens.validate();
    ens.seed = c.seed;
    if (ens.dims() != c.dims()) throw InvalidArgument("replayed data has a different dimension than the config");

    json summary{{"source", source}, {"members", ens.size()}};
    const double t_lo = ens.times().front(), t_hi = ens.times().back();
    if (ens.size() > 1 && !c.equivariance_times.empty()) {
        for (double t : c.equivariance_times)
            if (t < t_lo || t > t_hi) throw OutOfRange("equivariance time outside the replayed data");
        const auto report = ensemble::equivariance_test(ens, *ctx.history, c.equivariance_times);
        add(r, "equivariance.json", json_file(report.to_json(), ctx.hash));
        summary["equivariance_pass"] = report.all_pass();
    }
    const auto [index, value] = ensemble::select_max_density_trajectory(ens, *ctx.history);
    std::vector<double> values;
    add(r, "path_integrals.csv", path_integral_csv(ens, *ctx.history, ctx.hash, values));
    summary["selection"] = selection_json(ens, index, value);
    if (!ctx.perceptions.empty()) {
        const TheoryModel theory = ens.size() == 1 ? TheoryModel::sbm(ctx.history, ens.trajectories.front())
                                                   : TheoryModel::scbm(ctx.history, ens);
        auto rows = perception::measure_table(ctx.perceptions, TheoryModel::sqm(ctx.history));
        const auto replayed = perception::measure_table(ctx.perceptions, theory);
        rows.insert(rows.end(), replayed.begin(), replayed.end());
        add(r, "measures.csv", capture([&](std::ostream& o) { perception::write_measure_csv(o, rows, ctx.hash); }));
    }
    add(r, "replay.json", json_file(summary, ctx.hash));
    r.summary = summary;
    return r;
}

json manifest(const RunResult& r) {
    json files = json::array();
    for (const auto& f : r.files) files.push_back(f.name);
    files.push_back("manifest.json");
    return {{"tool", "bohmlab"},
            {"version", kToolVersion},
            {"config_hash", detail::format_hash(r.hash)},
            {"seed", r.config.seed},
            {"experiment", r.config.experiment},
            {"wall_time_s", r.wall_time_s},
            {"files", files},
            {"config", to_json(r.config)}};
}

namespace {

bool plain_name(const std::string& s) {
    return !s.empty() && s.find('/') == std::string::npos && s.find('\\') == std::string::npos && s != "." &&
           s != "..";
}

}  // namespace

void write_outputs(const RunResult& r, const fs::path& dir) {
    fs::create_directories(dir);
    std::set<std::string> present;
    for (const auto& e : fs::directory_iterator(dir)) present.insert(e.path().filename().string());
    if (!present.empty()) {
        const auto old = dir / "manifest.json";
        if (!present.count("manifest.json"))
            throw Error("output directory '" + dir.string() + "' is not empty and has no manifest.json; refusing to write");
        json m;
        try {
            m = json::parse(read_file(old));
        } catch (const json::exception& e) {
            throw Error("cannot read existing manifest in '" + dir.string() + "': " + e.what());
        }
        std::set<std::string> listed;
        if (m.contains("files") && m["files"].is_array())
            for (const auto& f : m["files"])
                if (f.is_string() && plain_name(f.get<std::string>())) listed.insert(f.get<std::string>());
        listed.insert("manifest.json");
        for (const auto& name : present)
            if (!listed.count(name))
                throw Error("output directory '" + dir.string() + "' holds '" + name +
                            "', which its manifest does not list; refusing to write");
        for (const auto& name : present) fs::remove(dir / name);
    }
    auto put = [&](const std::string& name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary);
        out << content;
        if (!out) throw Error("cannot write '" + (dir / name).string() + "'");
    };
    for (const auto& f : r.files) put(f.name, f.content);
    put("manifest.json", manifest(r).dump(2) + "\n");
}

namespace {

template <class Body>
RunResult timed(Body&& body) {
    const auto start = std::chrono::steady_clock::now();
    RunResult r = body();
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace

RunResult run(const fs::path& config_path, const RunOptions& options) {
    const auto c = apply_options(load_config(resolve_config_path(config_path)), options);
    auto r = timed([&] { return execute(c); });
    write_outputs(r, c.output.dir);
    return r;
}

RunResult run_replay(const fs::path& config_path, const fs::path& data_path, const RunOptions& options) {
    const auto c = apply_options(load_config(resolve_config_path(config_path)), options);
    const auto text = read_file(data_path);
    auto r = timed([&] { return replay(c, text); });
    write_outputs(r, c.output.dir);
    return r;
}

}  // namespace bohm::runner
