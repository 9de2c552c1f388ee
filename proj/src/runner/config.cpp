#include "bohm/runner/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "bohm/configspace/history.hpp"
#include "bohm/detail/overloaded.hpp"
#include "bohm/detail/text.hpp"

namespace bohm::runner {

using nlohmann::json;

std::string Diagnostic::to_string() const {
    std::string s;
    if (line) s = "line " + std::to_string(*line) + ": ";
    else if (!field.empty()) s = field + ": ";
    return s + message;
}

namespace {

std::string join(const std::vector<Diagnostic>& d) {
    std::string s;
    for (const auto& x : d) s += (s.empty() ? "" : "\n") + x.to_string();
    return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<Diagnostic> diags) : InvalidArgument(join(diags)), diags_(std::move(diags)) {}

namespace {

// Collects diagnostics while reading a JSON tree; every accessor falls back
// to a default so reading continues after a problem.
class Reader {
public:
    std::vector<Diagnostic> diags;

    void error(const std::string& field, const std::string& msg) { diags.push_back({std::nullopt, field, msg}); }

    bool object(const json& j, const std::string& path) {
        if (j.is_object()) return true;
        error(path, "expected an object");
        return false;
    }

    void keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
        if (!j.is_object()) return;
        for (const auto& [k, v] : j.items()) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
                error(join_path(path, k), "unknown field");
        }
    }

    static std::string join_path(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }

    double number(const json& j, const std::string& path, const char* key, double def, bool required = false) {
        if (!j.is_object() || !j.contains(key)) {
            if (required) error(join_path(path, key), "required number is missing");
            return def;
        }
        const auto& v = j.at(key);
        if (!v.is_number()) {
            error(join_path(path, key), "expected a number");
            return def;
        }
        return v.get<double>();
    }

    std::uint64_t count(const json& j, const std::string& path, const char* key, std::uint64_t def) {
        if (!j.is_object() || !j.contains(key)) return def;
        const auto& v = j.at(key);
        if (!v.is_number_unsigned()) {
            error(join_path(path, key), "expected a nonnegative integer");
            return def;
        }
        return v.get<std::uint64_t>();
    }

    bool boolean(const json& j, const std::string& path, const char* key, bool def) {
        if (!j.is_object() || !j.contains(key)) return def;
        if (!j.at(key).is_boolean()) {
            error(join_path(path, key), "expected true or false");
            return def;
        }
        return j.at(key).get<bool>();
    }

    std::string string(const json& j, const std::string& path, const char* key, const std::string& def,
                       bool required = false) {
        if (!j.is_object() || !j.contains(key)) {
            if (required) error(join_path(path, key), "required string is missing");
            return def;
        }
        if (!j.at(key).is_string()) {
            error(join_path(path, key), "expected a string");
            return def;
        }
        return j.at(key).get<std::string>();
    }

    std::vector<double> numbers(const json& v, const std::string& path) {
        std::vector<double> out;
        if (!v.is_array()) {
            error(path, "expected an array of numbers");
            return out;
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) error(path + "[" + std::to_string(i) + "]", "expected a number");
            else out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::vector<double> numbers(const json& j, const std::string& path, const char* key) {
        if (!j.is_object() || !j.contains(key)) return {};
        return numbers(j.at(key), join_path(path, key));
    }

    Point point(const json& v, const std::string& path, std::size_t dims) {
        Point p{0.0, 0.0};
        const auto xs = numbers(v, path);
        if (xs.size() != dims) {
            error(path, "expected " + std::to_string(dims) + " coordinate(s)");
            return p;
        }
        for (std::size_t a = 0; a < dims; ++a) p[a] = xs[a];
        return p;
    }

    std::vector<Point> points(const json& j, const std::string& path, const char* key, std::size_t dims) {
        std::vector<Point> out;
        if (!j.is_object() || !j.contains(key)) return out;
        const auto& v = j.at(key);
        const auto where = join_path(path, key);
        if (!v.is_array()) {
            error(where, "expected an array of points");
            return out;
        }
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(point(v[i], where + "[" + std::to_string(i) + "]", dims));
        return out;
    }

    configspace::Potential potential(const json& j, const std::string& path, std::size_t grid_size);
    StateRecipe state(const json& j, const std::string& path, std::size_t dims, std::size_t grid_size, int depth = 0);
    DensitySpec density(const json& j, const std::string& path, std::size_t dims);
};

configspace::Potential Reader::potential(const json& j, const std::string& path, std::size_t grid_size) {
    using namespace configspace;
    if (!object(j, path)) return FreePotential{};
    const auto type = string(j, path, "type", "free", true);
    if (type == "free") {
        keys(j, path, {"type"});
        return FreePotential{};
    }
    if (type == "harmonic") {
        keys(j, path, {"type", "omega"});
        HarmonicPotential h{number(j, path, "omega", 1.0)};
        if (!(h.omega > 0.0)) error(join_path(path, "omega"), "must be positive");
        return h;
    }
    if (type == "box") {
        keys(j, path, {"type", "left", "right", "barrier"});
        BoxPotential b{number(j, path, "left", -1.0, true), number(j, path, "right", 1.0, true),
                       number(j, path, "barrier", 1.0e4)};
        if (!(b.left < b.right)) error(path, "box needs left < right");
        return b;
    }
    if (type == "double_well") {
        keys(j, path, {"type", "barrier", "separation"});
        DoubleWellPotential d{number(j, path, "barrier", 1.0), number(j, path, "separation", 2.0)};
        if (!(d.separation > 0.0)) error(join_path(path, "separation"), "must be positive");
        return d;
    }
    if (type == "custom") {
        keys(j, path, {"type", "values"});
        CustomPotential c{numbers(j, path, "values")};
        if (c.values.size() != grid_size)
            error(join_path(path, "values"), "needs " + std::to_string(grid_size) + " values, one per grid point");
        return c;
    }
    error(join_path(path, "type"), "unknown potential '" + type + "' (free, harmonic, box, double_well, custom)");
    return FreePotential{};
}

StateRecipe Reader::state(const json& j, const std::string& path, std::size_t dims, std::size_t grid_size, int depth) {
    using namespace configspace;
    if (!object(j, path)) return {GaussianRecipe{}};
    const auto type = string(j, path, "type", "gaussian", true);
    if (type == "gaussian") {
        keys(j, path, {"type", "center", "width", "momentum"});
        GaussianRecipe g;
        if (j.contains("center")) g.center = point(j["center"], join_path(path, "center"), dims);
        if (j.contains("momentum")) g.momentum = point(j["momentum"], join_path(path, "momentum"), dims);
        g.width = number(j, path, "width", 1.0);
        return {g};
    }
    if (type == "eigenstate") {
        keys(j, path, {"type", "potential", "n"});
        EigenstateRecipe e;
        if (j.contains("potential")) e.potential = potential(j["potential"], join_path(path, "potential"), grid_size);
        else error(join_path(path, "potential"), "required object is missing");
        const auto n = numbers(j, path, "n");
        if (n.size() != dims) error(join_path(path, "n"), "expected " + std::to_string(dims) + " quantum number(s)");
        for (std::size_t a = 0; a < std::min<std::size_t>(n.size(), 2); ++a) {
            if (n[a] != std::floor(n[a]) || n[a] < 0.0) error(join_path(path, "n"), "quantum numbers are nonnegative integers");
            e.n[a] = static_cast<int>(n[a]);
        }
        return {e};
    }
    if (type == "superposition") {
        keys(j, path, {"type", "terms"});
        SuperpositionRecipe s;
        if (depth > 4) {
            error(path, "superpositions nest too deeply");
            return {s};
        }
        if (!j.contains("terms") || !j["terms"].is_array() || j["terms"].empty()) {
            error(join_path(path, "terms"), "expected a nonempty array");
            return {s};
        }
        for (std::size_t i = 0; i < j["terms"].size(); ++i) {
            const auto& t = j["terms"][i];
            const auto tp = join_path(path, "terms") + "[" + std::to_string(i) + "]";
            if (!object(t, tp)) continue;
            keys(t, tp, {"coefficient", "state"});
            SuperpositionTerm term;
            if (t.contains("coefficient")) {
                const auto c = numbers(t["coefficient"], join_path(tp, "coefficient"));
                if (c.size() != 2) error(join_path(tp, "coefficient"), "expected [re, im]");
                else term.coefficient = cplx(c[0], c[1]);
            }
            if (t.contains("state")) term.recipe = state(t["state"], join_path(tp, "state"), dims, grid_size, depth + 1);
            else error(join_path(tp, "state"), "required object is missing");
            s.terms.push_back(std::move(term));
        }
        return {s};
    }
    error(join_path(path, "type"), "unknown state '" + type + "' (gaussian, eigenstate, superposition)");
    return {GaussianRecipe{}};
}

DensitySpec Reader::density(const json& j, const std::string& path, std::size_t dims) {
    DensitySpec d;
    if (!object(j, path)) return d;
    d.type = string(j, path, "type", "quantum");
    if (d.type == "quantum") {
        keys(j, path, {"type"});
    } else if (d.type == "custom") {
        keys(j, path, {"type", "values"});
        d.values = numbers(j, path, "values");
    } else if (d.type == "gaussian") {
        keys(j, path, {"type", "center", "width"});
        if (j.contains("center")) d.center = point(j["center"], join_path(path, "center"), dims);
        d.width = number(j, path, "width", 1.0);
        if (!(d.width > 0.0)) error(join_path(path, "width"), "must be positive");
    } else {
        error(join_path(path, "type"), "unknown density '" + d.type + "' (quantum, custom, gaussian)");
    }
    return d;
}

json point_json(const Point& p, std::size_t dims) {
    json a = json::array();
    for (std::size_t i = 0; i < dims; ++i) a.push_back(p[i]);
    return a;
}

json density_json(const DensitySpec& d, std::size_t dims) {
    json j{{"type", d.type}};
    if (d.type == "custom") j["values"] = d.values;
    if (d.type == "gaussian") {
        j["center"] = point_json(d.center, dims);
        j["width"] = d.width;
    }
    return j;
}

bool needs_ensemble(const ExperimentConfig& c) {
    if (c.experiment == "equivariance" || c.experiment == "select-trajectory" || c.experiment == "typicality")
        return true;
    for (const auto& t : c.theories)
        if (t.type == "SCBM" || (t.type == "SBM" && t.member)) return true;
    return false;
}

bool needs_perceptions(const ExperimentConfig& c) {
    return c.experiment == "perceptions" || c.experiment == "typicality" || c.experiment == "compare";
}

// Checks that need the numerical objects themselves.
void semantic_checks(const ExperimentConfig& c, Reader& r) {
    using namespace configspace;
    std::optional<Grid> grid;
    try {
        grid.emplace(c.grid);
    } catch (const Error& e) {
        r.error("grid", e.what());
        return;
    }
    if (!(c.units.hbar > 0.0)) r.error("units.hbar", "must be positive");
    for (std::size_t a = 0; a < c.dims(); ++a)
        if (!(c.units.mass[a] > 0.0)) r.error("units.mass", "must be positive");

    std::optional<Wavefunction> psi;
    try {
        sample_potential(c.potential, *grid, c.units);
    } catch (const Error& e) {
        r.error("potential", e.what());
    }
    try {
        psi = make_state(*grid, c.state, c.units);
    } catch (const Error& e) {
        r.error("state", e.what());
    }
    const auto& ev = c.evolution;
    if (!(ev.t_end > 0.0)) r.error("evolution.t_end", "must be positive");
    if (psi && ev.t_end > 0.0) {
        try {
            WavefunctionHistory h(*psi, c.potential, EvolutionConfig{ev.dt, c.units}, ev.t_end, ev.snapshot_interval);
        } catch (const Error& e) {
            r.error("evolution", e.what());
        }
    }
    for (std::size_t i = 0; i < ev.output_times.size(); ++i)
        if (ev.output_times[i] < 0.0 || ev.output_times[i] > ev.t_end)
            r.error("evolution.output_times[" + std::to_string(i) + "]", "outside [0, t_end]");

    const auto& tr = c.trajectories;
    if (!(tr.step > 0.0)) r.error("trajectories.step", "must be positive");
    if (!(tr.output_interval > 0.0)) r.error("trajectories.output_interval", "must be positive");
    const auto& np = tr.node_policy;
    if (!(np.node_epsilon_rel > 0.0)) r.error("trajectories.node_policy.node_epsilon_rel", "must be positive");
    if (!(np.speed_cap >= 0.0)) r.error("trajectories.node_policy.speed_cap", "must be nonnegative (0 selects the default)");
    if (!(np.substep_shrink > 0.0 && np.substep_shrink < 1.0))
        r.error("trajectories.node_policy.substep_shrink", "must lie in (0, 1)");
    if (!(np.dt_min > 0.0)) r.error("trajectories.node_policy.dt_min", "must be positive");
    for (std::size_t i = 0; i < tr.x0.size(); ++i)
        if (!grid->contains(tr.x0[i])) r.error("trajectories.x0[" + std::to_string(i) + "]", "outside the grid");
    if (c.experiment == "trajectories" && tr.x0.empty()) r.error("trajectories.x0", "trajectories experiment needs seed points");

    auto check_density = [&](const DensitySpec& d, const std::string& path) {
        if (d.type == "custom") {
            if (d.values.size() != grid->size())
                r.error(path + ".values", "needs " + std::to_string(grid->size()) + " values, one per grid point");
            else if (std::any_of(d.values.begin(), d.values.end(), [](double v) { return !(v >= 0.0) || !std::isfinite(v); }))
                r.error(path + ".values", "must be finite and nonnegative");
            else if (std::all_of(d.values.begin(), d.values.end(), [](double v) { return v == 0.0; }))
                r.error(path + ".values", "density is identically zero");
        }
    };
    check_density(c.ensemble.density, "ensemble.density");
    if (needs_ensemble(c) && c.ensemble.n + c.ensemble.include.size() == 0) r.error("ensemble.N", "ensemble needs members");
    for (std::size_t i = 0; i < c.ensemble.include.size(); ++i)
        if (!grid->contains(c.ensemble.include[i])) r.error("ensemble.include[" + std::to_string(i) + "]", "outside the grid");
    if (c.ensemble.threads == 0) r.error("ensemble.threads", "must be at least 1");

    if (c.experiment == "equivariance" && c.equivariance_times.empty())
        r.error("equivariance.times", "equivariance experiment needs check times");
    for (std::size_t i = 0; i < c.equivariance_times.size(); ++i)
        if (c.equivariance_times[i] < 0.0 || c.equivariance_times[i] > ev.t_end)
            r.error("equivariance.times[" + std::to_string(i) + "]", "outside [0, t_end]");

    std::optional<perception::PerceptionSet> set;
    try {
        set = build_perceptions(c);
    } catch (const Error& e) {
        r.error("perceptions", e.what());
    }
    if (set) {
        if (needs_perceptions(c) && set->empty()) r.error("perceptions", "experiment needs at least one perception");
        for (const auto& p : set->perceptions()) {
            if (p.t > ev.t_end) r.error("perceptions", "perception '" + p.id + "' has t=" + detail::format_double(p.t) +
                                                           " beyond the final time " + detail::format_double(ev.t_end));
            if (p.t < 0.0) r.error("perceptions", "perception '" + p.id + "' has negative time");
            if (p.region.dims() != c.dims()) r.error("perceptions", "perception '" + p.id + "' has the wrong dimension");
        }
        if (c.experiment == "compare") {
            if (c.observed.empty()) r.error("observed", "compare experiment needs an observed perception id");
            else if (std::none_of(set->perceptions().begin(), set->perceptions().end(),
                                  [&](const auto& p) { return p.id == c.observed; }))
                r.error("observed", "no perception with id '" + c.observed + "'");
        }
    }

    if (c.experiment == "compare" && c.theories.empty())
        r.error("theories", "experiment needs at least one theory");
    const std::size_t members = c.ensemble.n + c.ensemble.include.size();
    for (std::size_t i = 0; i < c.theories.size(); ++i) {
        const auto& t = c.theories[i];
        const auto path = "theories[" + std::to_string(i) + "]";
        if (!(t.prior > 0.0)) r.error(path + ".prior", "must be positive");
        if (t.type == "SBM") {
            if (!t.member && !t.x0) r.error(path, "SBM theory needs `member` or `x0`");
            if (t.member && *t.member >= members) r.error(path + ".member", "no such ensemble member");
            if (t.x0 && !grid->contains(*t.x0)) r.error(path + ".x0", "outside the grid");
        }
        if (t.type == "GCBM") {
            if (!t.density) r.error(path + ".density", "GCBM theory needs a seed density");
            else check_density(*t.density, path + ".density");
        }
    }
}

std::size_t line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

ExperimentConfig read_config(const json& j, Reader& r) {
    ExperimentConfig c;
    if (!r.object(j, "")) return c;
    r.keys(j, "", {"name", "experiment", "seed", "grid", "units", "potential", "state", "evolution", "trajectories",
                   "ensemble", "equivariance", "perceptions", "theories", "observed", "sbm_members", "output"});
    c.name = r.string(j, "", "name", c.name);
    c.experiment = r.string(j, "", "experiment", c.experiment, true);
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), c.experiment) == names.end())
        r.error("experiment", "unknown experiment '" + c.experiment + "'");
    c.seed = r.count(j, "", "seed", c.seed);

    if (j.contains("grid")) {
        const auto& g = j["grid"];
        if (r.object(g, "grid")) {
            r.keys(g, "grid", {"axes"});
            if (!g.contains("axes") || !g["axes"].is_array() || g["axes"].empty() || g["axes"].size() > 2) {
                r.error("grid.axes", "expected one or two axes");
            } else {
                c.grid.clear();
                for (std::size_t a = 0; a < g["axes"].size(); ++a) {
                    const auto& ax = g["axes"][a];
                    const auto path = "grid.axes[" + std::to_string(a) + "]";
                    if (!r.object(ax, path)) continue;
                    r.keys(ax, path, {"min", "max", "points"});
                    c.grid.push_back({r.number(ax, path, "min", -16.0, true), r.number(ax, path, "max", 16.0, true),
                                      static_cast<std::size_t>(r.count(ax, path, "points", 512))});
                }
                if (c.grid.empty()) c.grid = {{-16.0, 16.0, 512}};
            }
        }
    }
    const std::size_t dims = c.grid.size();
    std::size_t grid_size = 1;
    for (const auto& a : c.grid) grid_size *= a.points;

    if (j.contains("units") && r.object(j["units"], "units")) {
        const auto& u = j["units"];
        r.keys(u, "units", {"hbar", "mass"});
        c.units.hbar = r.number(u, "units", "hbar", 1.0);
        if (u.contains("mass")) {
            const auto m = r.numbers(u["mass"], "units.mass");
            if (m.size() != dims) r.error("units.mass", "expected one mass per axis");
            for (std::size_t a = 0; a < std::min<std::size_t>(m.size(), 2); ++a) c.units.mass[a] = m[a];
        }
    }
    if (j.contains("potential")) c.potential = r.potential(j["potential"], "potential", grid_size);
    if (j.contains("state")) c.state = r.state(j["state"], "state", dims, grid_size);
    else r.error("state", "required object is missing");

    if (j.contains("evolution") && r.object(j["evolution"], "evolution")) {
        const auto& e = j["evolution"];
        r.keys(e, "evolution", {"dt", "t_end", "snapshot_interval", "output_times"});
        c.evolution.dt = r.number(e, "evolution", "dt", c.evolution.dt);
        c.evolution.t_end = r.number(e, "evolution", "t_end", c.evolution.t_end, true);
        c.evolution.snapshot_interval = r.number(e, "evolution", "snapshot_interval", c.evolution.snapshot_interval);
        c.evolution.output_times = r.numbers(e, "evolution", "output_times");
    } else if (!j.contains("evolution")) {
        r.error("evolution", "required object is missing");
    }

    if (j.contains("trajectories") && r.object(j["trajectories"], "trajectories")) {
        const auto& t = j["trajectories"];
        r.keys(t, "trajectories", {"x0", "step", "output_interval", "node_policy"});
        c.trajectories.x0 = r.points(t, "trajectories", "x0", dims);
        c.trajectories.step = r.number(t, "trajectories", "step", c.trajectories.step);
        c.trajectories.output_interval = r.number(t, "trajectories", "output_interval", c.trajectories.output_interval);
        if (t.contains("node_policy") && r.object(t["node_policy"], "trajectories.node_policy")) {
            const auto& n = t["node_policy"];
            const std::string p = "trajectories.node_policy";
            r.keys(n, p, {"node_epsilon_rel", "speed_cap", "substep_shrink", "dt_min"});
            auto& np = c.trajectories.node_policy;
            np.node_epsilon_rel = r.number(n, p, "node_epsilon_rel", np.node_epsilon_rel);
            np.speed_cap = r.number(n, p, "speed_cap", np.speed_cap);
            np.substep_shrink = r.number(n, p, "substep_shrink", np.substep_shrink);
            np.dt_min = r.number(n, p, "dt_min", np.dt_min);
        }
    }

    if (j.contains("ensemble") && r.object(j["ensemble"], "ensemble")) {
        const auto& e = j["ensemble"];
        r.keys(e, "ensemble", {"N", "density", "include", "threads"});
        c.ensemble.n = static_cast<std::size_t>(r.count(e, "ensemble", "N", c.ensemble.n));
        if (e.contains("density")) c.ensemble.density = r.density(e["density"], "ensemble.density", dims);
        c.ensemble.include = r.points(e, "ensemble", "include", dims);
        c.ensemble.threads = static_cast<unsigned>(r.count(e, "ensemble", "threads", c.ensemble.threads));
    }

    if (j.contains("equivariance") && r.object(j["equivariance"], "equivariance")) {
        r.keys(j["equivariance"], "equivariance", {"times"});
        c.equivariance_times = r.numbers(j["equivariance"], "equivariance", "times");
    }

    if (j.contains("perceptions") && r.object(j["perceptions"], "perceptions")) {
        const auto& p = j["perceptions"];
        r.keys(p, "perceptions", {"family", "list"});
        if (p.contains("family") && !p["family"].is_null() && r.object(p["family"], "perceptions.family")) {
            const auto& f = p["family"];
            const std::string fp = "perceptions.family";
            r.keys(f, fp, {"times", "cells", "edges", "regions", "priors"});
            FamilySpecConfig fam;
            fam.times = r.numbers(f, fp, "times");
            if (fam.times.empty()) r.error(fp + ".times", "needs at least one time");
            for (double n : r.numbers(f, fp, "cells")) {
                if (n < 1.0 || n != std::floor(n)) r.error(fp + ".cells", "cell counts are positive integers");
                fam.cells.push_back(static_cast<std::size_t>(std::max(1.0, n)));
            }
            auto lists = [&](const char* key, std::vector<std::vector<double>>& out) {
                if (!f.contains(key)) return;
                const auto where = fp + "." + key;
                if (!f[key].is_array()) {
                    r.error(where, "expected an array of arrays");
                    return;
                }
                for (std::size_t i = 0; i < f[key].size(); ++i)
                    out.push_back(r.numbers(f[key][i], where + "[" + std::to_string(i) + "]"));
            };
            lists("edges", fam.edges);
            lists("regions", fam.regions);
            fam.priors = r.numbers(f, fp, "priors");
            const int modes = !fam.cells.empty() + !fam.edges.empty() + !fam.regions.empty();
            if (modes != 1) r.error(fp, "give exactly one of `cells`, `edges` or `regions`");
            c.perceptions.family = std::move(fam);
        }
        if (p.contains("list")) {
            if (!p["list"].is_array()) r.error("perceptions.list", "expected an array");
            else c.perceptions.list = p["list"];
        }
    }

    if (j.contains("theories")) {
        if (!j["theories"].is_array()) {
            r.error("theories", "expected an array");
        } else {
            for (std::size_t i = 0; i < j["theories"].size(); ++i) {
                const auto& t = j["theories"][i];
                const auto path = "theories[" + std::to_string(i) + "]";
                if (!r.object(t, path)) continue;
                r.keys(t, path, {"type", "prior", "member", "x0", "density"});
                TheorySpec s;
                s.type = r.string(t, path, "type", "SQM", true);
                if (s.type != "SQM" && s.type != "SBM" && s.type != "SCBM" && s.type != "GCBM")
                    r.error(path + ".type", "unknown theory '" + s.type + "' (SQM, SBM, SCBM, GCBM)");
                s.prior = r.number(t, path, "prior", 1.0);
                if (t.contains("member")) s.member = static_cast<std::size_t>(r.count(t, path, "member", 0));
                if (t.contains("x0")) s.x0 = r.point(t["x0"], path + ".x0", dims);
                if (t.contains("density")) s.density = r.density(t["density"], path + ".density", dims);
                c.theories.push_back(std::move(s));
            }
        }
    }
    c.observed = r.string(j, "", "observed", "");
    c.sbm_members = static_cast<std::size_t>(r.count(j, "", "sbm_members", c.sbm_members));

    if (j.contains("output") && r.object(j["output"], "output")) {
        r.keys(j["output"], "output", {"dir", "svg"});
        c.output.dir = r.string(j["output"], "output", "dir", "");
        c.output.svg = r.boolean(j["output"], "output", "svg", false);
    }
    if (c.output.dir.empty()) c.output.dir = "out/" + c.name;
    return c;
}

}  // namespace

nlohmann::json potential_to_json(const Potential& v) {
    using namespace configspace;
    return std::visit(detail::overloaded{
                          [](const FreePotential&) { return json{{"type", "free"}}; },
                          [](const HarmonicPotential& h) { return json{{"type", "harmonic"}, {"omega", h.omega}}; },
                          [](const BoxPotential& b) {
                              return json{{"type", "box"}, {"left", b.left}, {"right", b.right}, {"barrier", b.barrier}};
                          },
                          [](const DoubleWellPotential& d) {
                              return json{{"type", "double_well"}, {"barrier", d.barrier}, {"separation", d.separation}};
                          },
                          [](const CustomPotential& c) { return json{{"type", "custom"}, {"values", c.values}}; },
                      },
                      v);
}

nlohmann::json state_to_json(const StateRecipe& s, std::size_t dims) {
    using namespace configspace;
    return std::visit(detail::overloaded{
                          [&](const GaussianRecipe& g) {
                              return json{{"type", "gaussian"},
                                          {"center", point_json(g.center, dims)},
                                          {"width", g.width},
                                          {"momentum", point_json(g.momentum, dims)}};
                          },
                          [&](const EigenstateRecipe& e) {
                              json n = json::array();
                              for (std::size_t a = 0; a < dims; ++a) n.push_back(e.n[a]);
                              return json{{"type", "eigenstate"}, {"potential", potential_to_json(e.potential)}, {"n", n}};
                          },
                          [&](const SuperpositionRecipe& sp) {
                              json terms = json::array();
                              for (const auto& t : sp.terms)
                                  terms.push_back({{"coefficient", {t.coefficient.real(), t.coefficient.imag()}},
                                                   {"state", state_to_json(t.recipe, dims)}});
                              return json{{"type", "superposition"}, {"terms", terms}};
                          },
                      },
                      s.kind);
}

configspace::Potential potential_from_json(const nlohmann::json& j) {
    Reader r;
    auto v = r.potential(j, "potential", 0);
    if (!r.diags.empty() && !(r.diags.size() == 1 && r.diags[0].field == "potential.values")) throw ConfigError(r.diags);
    return v;
}

StateRecipe state_from_json(const nlohmann::json& j) {
    Reader r;
    std::size_t dims = 1;
    if (j.is_object() && j.contains("center") && j["center"].is_array()) dims = j["center"].size();
    auto s = r.state(j, "state", dims, 0);
    if (!r.diags.empty()) throw ConfigError(r.diags);
    return s;
}

nlohmann::json to_json(const ExperimentConfig& c) {
    const std::size_t dims = c.dims();
    json axes = json::array();
    for (const auto& a : c.grid) axes.push_back({{"min", a.min}, {"max", a.max}, {"points", a.points}});
    json mass = json::array();
    for (std::size_t a = 0; a < dims; ++a) mass.push_back(c.units.mass[a]);
    auto pts = [&](const std::vector<Point>& ps) {
        json a = json::array();
        for (const auto& p : ps) a.push_back(point_json(p, dims));
        return a;
    };
    const auto& np = c.trajectories.node_policy;
    json family = nullptr;
    if (c.perceptions.family) {
        const auto& f = *c.perceptions.family;
        family = {{"times", f.times}, {"priors", f.priors}};
        if (!f.cells.empty()) family["cells"] = f.cells;
        if (!f.edges.empty()) family["edges"] = f.edges;
        if (!f.regions.empty()) family["regions"] = f.regions;
    }
    json theories = json::array();
    for (const auto& t : c.theories) {
        json e{{"type", t.type}, {"prior", t.prior}};
        if (t.member) e["member"] = *t.member;
        if (t.x0) e["x0"] = point_json(*t.x0, dims);
        if (t.density) e["density"] = density_json(*t.density, dims);
        theories.push_back(e);
    }
    return {
        {"name", c.name},
        {"experiment", c.experiment},
        {"seed", c.seed},
        {"grid", {{"axes", axes}}},
        {"units", {{"hbar", c.units.hbar}, {"mass", mass}}},
        {"potential", potential_to_json(c.potential)},
        {"state", state_to_json(c.state, dims)},
        {"evolution",
         {{"dt", c.evolution.dt},
          {"t_end", c.evolution.t_end},
          {"snapshot_interval", c.evolution.snapshot_interval},
          {"output_times", c.evolution.output_times}}},
        {"trajectories",
         {{"x0", pts(c.trajectories.x0)},
          {"step", c.trajectories.step},
          {"output_interval", c.trajectories.output_interval},
          {"node_policy",
           {{"node_epsilon_rel", np.node_epsilon_rel},
            {"speed_cap", np.speed_cap},
            {"substep_shrink", np.substep_shrink},
            {"dt_min", np.dt_min}}}}},
        {"ensemble",
         {{"N", c.ensemble.n},
          {"density", density_json(c.ensemble.density, dims)},
          {"include", pts(c.ensemble.include)},
          {"threads", c.ensemble.threads}}},
        {"equivariance", {{"times", c.equivariance_times}}},
        {"perceptions", {{"family", family}, {"list", c.perceptions.list}}},
        {"theories", theories},
        {"observed", c.observed},
        {"sbm_members", c.sbm_members},
        {"output", {{"dir", c.output.dir}, {"svg", c.output.svg}}},
    };
}

perception::PerceptionSet build_perceptions(const ExperimentConfig& c) {
    const auto grid = c.make_grid();
    perception::PerceptionSet out;
    if (c.perceptions.family) {
        const auto& f = *c.perceptions.family;
        perception::FamilySpec spec;
        spec.times = f.times;
        spec.priors = f.priors;
        if (!f.cells.empty()) {
            if (f.cells.size() != grid.dims()) throw InvalidArgument("family.cells needs one count per axis");
            for (std::size_t a = 0; a < grid.dims(); ++a) spec.edges[a] = perception::uniform_edges(grid.axis(a), f.cells[a]);
        } else if (!f.edges.empty()) {
            if (f.edges.size() != grid.dims()) throw InvalidArgument("family.edges needs one edge list per axis");
            for (std::size_t a = 0; a < grid.dims(); ++a) spec.edges[a] = f.edges[a];
        } else {
            for (std::size_t i = 0; i < f.regions.size(); ++i) {
                const auto& b = f.regions[i];
                if (grid.dims() == 1 && b.size() == 2) spec.cells.push_back(perception::Region::intervals({{b[0], b[1]}}));
                else if (grid.dims() == 2 && b.size() == 4)
                    spec.cells.push_back(perception::Region::rectangles({perception::Box{{b[0], b[2]}, {b[1], b[3]}}}));
                else throw InvalidArgument("family.regions[" + std::to_string(i) + "] has the wrong arity");
            }
        }
        out = perception::build_perception_family(grid, spec);
    }
    if (!c.perceptions.list.empty()) {
        const auto extra = perception::perceptions_from_json(json{{"perceptions", c.perceptions.list}});
        for (const auto& p : extra.perceptions()) out.add(p);
    }
    return out;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
    Reader r;
    auto c = read_config(j, r);
    if (r.diags.empty()) semantic_checks(c, r);
    if (!r.diags.empty()) throw ConfigError(std::move(r.diags));
    return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({{line_of(text, e.byte), "", e.what()}});
    }
    return parse_config(j);
}

std::vector<Diagnostic> validate_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        return {{line_of(text, e.byte), "", e.what()}};
    }
    Reader r;
    const auto c = read_config(j, r);
    // Structural problems can leave fields at defaults; semantic checks still
    // run so one pass reports as much as possible.
    semantic_checks(c, r);
    return r.diags;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<Diagnostic> validate(const std::filesystem::path& path) { return validate_text(read_file(path)); }

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config_text(read_file(path)); }

std::filesystem::path resolve_config_path(const std::filesystem::path& p) {
    if (p.is_absolute() || std::filesystem::exists(p)) return p;
    if (const char* env = std::getenv("BOHMLAB_CONFIG_PATH")) {
        for (const auto& dir : detail::split(env, ':')) {
            if (dir.empty()) continue;
            const auto candidate = std::filesystem::path(dir) / p;
            if (std::filesystem::exists(candidate)) return candidate;
        }
    }
    return p;
}

std::uint64_t config_hash(const ExperimentConfig& c) {
    auto j = to_json(c);
    j["output"].erase("dir");
    j["ensemble"].erase("threads");
    return detail::fnv1a(j.dump());
}

}  // namespace bohm::runner
