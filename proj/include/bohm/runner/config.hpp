#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bohm/configspace/recipes.hpp"
#include "bohm/perception/perception.hpp"
#include "json.hpp"

namespace bohm::runner {

using configspace::Potential;
using configspace::StateRecipe;

inline constexpr const char* kToolVersion = "0.1.0";

// Experiments `run` knows how to execute.
inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"evolve",     "trajectories", "equivariance",     "perceptions",
                                                "typicality", "compare",      "select-trajectory"};
    return names;
}

struct EvolutionSpec {
    double dt = 1e-3;
    double t_end = 1.0;
    double snapshot_interval = 5e-3;
    std::vector<double> output_times;  // wavefunction dumps for `evolve`
};

struct NodePolicySpec {
    double node_epsilon_rel = 1e-12;  // times the initial peak density
    double speed_cap = 0.0;           // 0: 100 * extent / duration
    double substep_shrink = 0.5;
    double dt_min = 1e-9;
};

struct TrajectorySpec {
    std::vector<Point> x0;
    double step = 0.01;
    double output_interval = 0.05;
    NodePolicySpec node_policy;
};

// Initial ensemble density: |psi|^2, a tabulated table, or a Gaussian
// profile tabulated on the grid.
struct DensitySpec {
    std::string type = "quantum";  // quantum | custom | gaussian
    std::vector<double> values;
    Point center{0.0, 0.0};
    double width = 1.0;
};

struct EnsembleSpec {
    std::size_t n = 1000;
    DensitySpec density;
    std::vector<Point> include;  // extra members appended after the sampled ones
    unsigned threads = 1;
};

struct FamilySpecConfig {
    std::vector<double> times;
    std::vector<std::size_t> cells;           // equal cells per axis
    std::vector<std::vector<double>> edges;   // explicit edges per axis
    std::vector<std::vector<double>> regions; // explicit cells: [lo, hi] or [x0, x1, y0, y1]
    std::vector<double> priors;
};

struct PerceptionSpec {
    std::optional<FamilySpecConfig> family;
    nlohmann::json list = nlohmann::json::array();  // explicit perceptions
};

struct TheorySpec {
    std::string type = "SQM";  // SQM | SBM | SCBM | GCBM
    double prior = 1.0;
    std::optional<std::size_t> member;  // SBM: ensemble member
    std::optional<Point> x0;            // SBM: own trajectory
    std::optional<DensitySpec> density; // GCBM seed density
    bool operator==(const TheorySpec&) const = default;
};

struct OutputSpec {
    std::string dir;
    bool svg = false;
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::string experiment = "evolve";
    std::uint64_t seed = 1;
    std::vector<configspace::Axis> grid{{-16.0, 16.0, 512}};
    configspace::Units units;
    Potential potential = configspace::FreePotential{};
    StateRecipe state;
    EvolutionSpec evolution;
    TrajectorySpec trajectories;
    EnsembleSpec ensemble;
    std::vector<double> equivariance_times;
    PerceptionSpec perceptions;
    std::vector<TheorySpec> theories;
    std::string observed;
    std::size_t sbm_members = 3;
    OutputSpec output;

    std::size_t dims() const { return grid.size(); }
    configspace::Grid make_grid() const { return configspace::Grid(grid); }
};

// `line` is set for syntax errors; `field` is a dotted path otherwise.
struct Diagnostic {
    std::optional<std::size_t> line;
    std::string field;
    std::string message;
    std::string to_string() const;
};

class ConfigError : public InvalidArgument {
public:
    explicit ConfigError(std::vector<Diagnostic> diags);
    const std::vector<Diagnostic>& diagnostics() const { return diags_; }

private:
    std::vector<Diagnostic> diags_;
};

// Every default is written out, so the result fully determines a run.
nlohmann::json to_json(const ExperimentConfig& c);

// Parses and checks structure and consistency; throws ConfigError with all
// diagnostics found.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text);

// All problems in the text: syntax, structure, then semantic checks (t_p
// past t_end, overlapping cells, unresolvable states, unstable steps ...).
std::vector<Diagnostic> validate_text(const std::string& text);
// Throws std::filesystem::filesystem_error style IO errors as bohm::Error.
std::vector<Diagnostic> validate(const std::filesystem::path& path);

ExperimentConfig load_config(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);

// Relative paths that do not exist are looked up in the directories of
// BOHMLAB_CONFIG_PATH (colon separated).
std::filesystem::path resolve_config_path(const std::filesystem::path& p);

// FNV-1a over the canonical serialization, excluding the output directory.
std::uint64_t config_hash(const ExperimentConfig& c);

// Building blocks shared with the runner.
configspace::Potential potential_from_json(const nlohmann::json& j);
nlohmann::json potential_to_json(const Potential& v);
StateRecipe state_from_json(const nlohmann::json& j);
nlohmann::json state_to_json(const StateRecipe& s, std::size_t dims);
perception::PerceptionSet build_perceptions(const ExperimentConfig& c);

}  // namespace bohm::runner
