#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bohm/runner/config.hpp"
#include "json.hpp"

namespace bohm::runner {

// Command-line overrides applied on top of the config file.
struct RunOptions {
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

struct OutputFile {
    std::string name;  // relative to the output directory
    std::string content;
};

// Everything an experiment produced, held in memory until written.
struct RunResult {
    ExperimentConfig config;
    std::uint64_t hash = 0;
    std::vector<OutputFile> files;
    nlohmann::json summary;
    double wall_time_s = 0.0;
};

ExperimentConfig apply_options(ExperimentConfig c, const RunOptions& options);

// Runs the named experiment without touching the filesystem.
RunResult execute(const ExperimentConfig& c);

// Re-analyzes an exported ensemble or trajectory CSV against the config's
// wavefunction: equivariance, max-density selection and perception measures.
RunResult replay(const ExperimentConfig& c, const std::string& csv_text);

// tool, version, config_hash, seed, experiment, wall_time_s, files, config.
nlohmann::json manifest(const RunResult& r);

// Writes the files and manifest.json. A non-empty directory is only reused
// when it holds a manifest; the files that manifest lists are removed first.
void write_outputs(const RunResult& r, const std::filesystem::path& dir);

// load + override + execute + write.
RunResult run(const std::filesystem::path& config_path, const RunOptions& options = {});
RunResult run_replay(const std::filesystem::path& config_path, const std::filesystem::path& data_path,
                     const RunOptions& options = {});

}  // namespace bohm::runner
