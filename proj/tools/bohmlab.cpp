#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bohm/runner/run.hpp"

namespace runner = bohm::runner;

namespace {

// Exit codes: 0 success, 1 invalid config, 2 runtime or I/O failure.
template <class Body>
int guarded(const std::string& context, Body&& body) {
    try {
        return body();
    } catch (const runner::ConfigError& e) {
        for (const auto& d : e.diagnostics()) std::cerr << context << ": " << d.to_string() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << context << ": " << e.what() << "\n";
        return 2;
    }
}

void report(const runner::RunResult& r) {
    std::cout << r.config.experiment << " -> " << r.config.output.dir << " (" << r.files.size() + 1
              << " files, config_hash=" << runner::manifest(r)["config_hash"].get<std::string>() << ")\n"
              << r.summary.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pilot-wave experiments: wavefunction evolution, trajectories, ensembles and typicality"};
    app.require_subcommand(1);
    app.set_version_flag("--version", runner::kToolVersion);

    std::string config, data;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    const char* search = "relative config paths are also looked up in the directories of BOHMLAB_CONFIG_PATH";

    auto* run = app.add_subcommand("run", "Run the experiment a config describes");
    run->footer(search);
    run->add_option("config", config, "Experiment config (JSON)")->required();
    run->add_option("-o,--out", out, "Output directory (overrides output.dir)");
    run->add_option("-s,--seed", seed, "Seed override");
    run->add_option("-j,--threads", threads, "Worker threads for ensemble integration")->check(CLI::PositiveNumber);

    auto* validate = app.add_subcommand("validate", "Report every problem in a config");
    validate->footer(search);
    validate->add_option("config", config, "Experiment config (JSON)")->required();

    auto* replay = app.add_subcommand("replay", "Re-analyze exported trajectories without re-integrating");
    replay->footer(search);
    replay->add_option("data", data, "Ensemble or trajectory CSV")->required()->check(CLI::ExistingFile);
    replay->add_option("-c,--config", config, "Config the data was produced with")->required();
    replay->add_option("-o,--out", out, "Output directory (overrides output.dir)");
    replay->add_option("-s,--seed", seed, "Seed recorded in the outputs");

    CLI11_PARSE(app, argc, argv);

    runner::RunOptions options;
    if (out) options.out_dir = *out;
    options.seed = seed;
    options.threads = threads;

    if (*run) {
        return guarded(config, [&] {
            report(runner::run(config, options));
            return 0;
        });
    }
    if (*validate) {
        return guarded(config, [&] {
            const auto diags = runner::validate(runner::resolve_config_path(config));
            for (const auto& d : diags) std::cout << config << ": " << d.to_string() << "\n";
            if (diags.empty()) std::cout << config << ": ok\n";
            return diags.empty() ? 0 : 1;
        });
    }
    return guarded(config, [&] {
        report(runner::run_replay(config, data, options));
        return 0;
    });
}
