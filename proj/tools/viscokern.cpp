// viscokern <scenario> --config <path> [--out <dir>] [--default]
//
// Exit status is 0 when every verdict of the scenario passes, 1 when a
// verdict fails and 2 for configuration or runtime errors.

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "viscokern/config.hpp"
#include "viscokern/scenarios.hpp"

int main(int argc, char** argv) {
    using namespace viscokern;

    CLI::App app{"Viscoelastic memory-kernel studies"};
    std::string scenario;
    std::string config_path;
    std::string out_dir;
    bool use_defaults = false;
    app.add_option("scenario", scenario, "Study to run")
        ->required()
        ->check(CLI::IsMember(scenario_names()));
    app.add_option("--config", config_path, "Configuration file (section.key = value lines)");
    app.add_option("--out", out_dir, "Output directory (overrides output.directory)");
    app.add_flag("--default", use_defaults, "Run with the built-in defaults for the scenario");
    CLI11_PARSE(app, argc, argv);

    if (config_path.empty() && !use_defaults) {
        std::cerr << "error: pass --config <path> or --default\n";
        return 2;
    }

    try {
        RunConfig cfg = default_config(scenario);
        if (!config_path.empty()) cfg = load_config(config_path, cfg);
        if (!out_dir.empty()) cfg.output.directory = out_dir;

        const ScenarioResult result = run_scenario(scenario, cfg);
        write_result(result, cfg, cfg.output.directory);

        for (const auto& line : result.summary) std::cout << line << '\n';
        std::cout << "wrote " << cfg.output.directory << '\n';
        if (!result.passed) {
            std::cerr << scenario << ": verdict FAILED\n";
            for (const auto& line : result.summary) std::cerr << "  " << line << '\n';
            return 1;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "configuration errors:\n" << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return 2;
}
