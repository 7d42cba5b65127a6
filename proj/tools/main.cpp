#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hivetherm/io/config.hpp"
#include "hivetherm/io/pipeline.hpp"

namespace {

struct CliArgs {
    std::string config_path;
    hivetherm::io::PipelineOptions pipeline;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, CliArgs& args, bool needs_input) {
    sub->add_option("--config", args.config_path, "JSON run configuration")
        ->check(CLI::ExistingFile);
    auto* input = sub->add_option("--input", args.pipeline.inputs, "sensor CSV file(s)");
    if (needs_input) input->required();
    sub->add_option("--out", args.pipeline.out_dir, "output directory")->required();
    sub->add_option("--hive", args.pipeline.hive_filter, "process only this hive id");
    sub->add_flag("--no-plots", args.pipeline.no_plots, "skip SVG plot output");
}

int run(hivetherm::io::Command cmd, const CliArgs& args) {
    using namespace hivetherm;
    try {
        io::RunConfig config =
            args.config_path.empty() ? io::RunConfig{} : io::load_config(args.config_path);
        auto options = args.pipeline;
        options.seed_override = args.seed;
        const auto summary = io::run_pipeline(cmd, config, options);
        for (const auto& w : summary.warnings) std::cerr << "warning: " << w << "\n";
        std::cout << "wrote " << summary.artifacts.size() << " artifact(s) to "
                  << options.out_dir << "\n";
        return 0;
    } catch (const Error& e) {
        nlohmann::json err{{"error", to_string(e.code())}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        nlohmann::json err{{"error", "Internal"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hive temperature modeling: simulation, fitting, event detection, forecasting"};
    app.require_subcommand(1);

    CliArgs args;
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset from the config");
    add_common(simulate, args, false);
    simulate->add_option("--seed", args.seed, "override the scenario seed");

    add_common(app.add_subcommand("fit", "per-day parameter fits"), args, true);
    add_common(app.add_subcommand("segment", "detect cut points via AIC segmentation"), args, true);
    add_common(app.add_subcommand("forecast", "fit a trailing window and forecast ahead"), args,
               true);
    add_common(app.add_subcommand("evaluate", "rolling forecast benchmark against baselines"),
               args, true);

    CLI11_PARSE(app, argc, argv);

    using hivetherm::io::Command;
    if (app.got_subcommand("simulate")) return run(Command::Simulate, args);
    if (app.got_subcommand("fit")) return run(Command::Fit, args);
    if (app.got_subcommand("segment")) return run(Command::Segment, args);
    if (app.got_subcommand("forecast")) return run(Command::Forecast, args);
    return run(Command::Evaluate, args);
}
