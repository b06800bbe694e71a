// Command-line harness: runs experiment configs, expands the bundled
// presets, and validates config files without running them.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <pricesim/pricesim.hpp>

namespace {

int run_config(const pricesim::ExperimentConfig& cfg, const std::string& out_dir) {
    pricesim::ExperimentResult result = pricesim::run_experiment(cfg, out_dir);
    const std::string dir = out_dir.empty() ? cfg.output.directory : out_dir;
    for (const auto& run : result.runs) {
        if (run.failed)
            std::cout << "run " << run.label << ": FAILED (" << run.error << ")\n";
        else
            std::cout << "run " << run.label << ": ok, " << run.records.size()
                      << " records, " << run.snapshots.size() << " field snapshots\n";
    }
    std::cout << "artifacts written to " << dir << "/\n";
    return result.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"solvers for kinetic and free-boundary price formation models"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    auto* run_cmd = app.add_subcommand("run", "execute an experiment config");
    run_cmd->add_option("config", config_path, "experiment config (JSON)")->required();
    run_cmd->add_option("--out", out_dir, "output directory (overrides config)");

    std::string preset_name;
    std::string preset_out = "out";
    std::string scale = "desk";
    auto* preset_cmd = app.add_subcommand("preset", "run a bundled experiment");
    preset_cmd->add_option("name", preset_name, "example1 | example2 | example3 | example4")
        ->required();
    preset_cmd->add_option("--out", preset_out, "output directory");
    preset_cmd->add_option("--scale", scale, "desk (default) or paper");

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "check a config without running");
    validate_cmd->add_option("config", validate_path, "experiment config (JSON)")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            return run_config(pricesim::load_config(config_path), out_dir);
        }
        if (*preset_cmd) {
            auto cfg = pricesim::preset_config(preset_name,
                                               pricesim::scale_from_string(scale));
            cfg.output.directory = preset_out;
            // keep the expanded config next to the artifacts
            std::filesystem::create_directories(preset_out);
            std::ofstream dump(preset_out + "/config_" + preset_name + "_" + scale +
                               ".json");
            dump << pricesim::config_to_json(cfg).dump(2) << '\n';
            return run_config(cfg, preset_out);
        }
        if (*validate_cmd) {
            pricesim::load_config(validate_path);
            std::cout << "ok\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
