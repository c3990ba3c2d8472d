#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "smcforge/cli/run.hpp"
#include "smcforge/errors.hpp"

namespace {

struct SubArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> workdir;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"smcforge — soil-moisture forecasting pipeline on synthetic EO data"};
    app.require_subcommand(1);

    const std::pair<const char*, const char*> commands[] = {
        {"simulate", "Generate the synthetic world (scenes, truth, sensors, weather)"},
        {"train", "Train the configured forecaster(s) on the simulated world"},
        {"predict", "Forecast moisture maps from the latest (or configured) date"},
        {"evaluate", "Score trained forecasters on the held-out span"},
        {"compare", "Run the AE-vs-LSTM data-ablation experiment"},
        {"ndvi-map", "Render the crop-stress NDVI heatmap"},
    };

    SubArgs args;
    std::string chosen;
    for (const auto& [name, desc] : commands) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", args.config, "Run config JSON file")->required();
        sub->add_option("--seed", [&args](const CLI::results_t& vals) {
            args.seed = std::stoull(vals.at(0));
            return true;
        }, "Override the sim and train seeds");
        sub->add_option("--workdir", [&args](const CLI::results_t& vals) {
            args.workdir = vals.at(0);
            return true;
        }, "Override paths.workdir");
        sub->callback([&chosen, name = std::string(name)] { chosen = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        smcforge::cli::RunConfig cfg = smcforge::cli::load_run_config(args.config);
        smcforge::cli::apply_overrides(cfg, args.seed, args.workdir);
        smcforge::cli::run_command(chosen, cfg);
        return 0;
    } catch (const smcforge::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const smcforge::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
