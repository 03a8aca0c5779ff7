#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mrcr/commands.hpp"
#include "mrcr/errors.hpp"

namespace {

constexpr int kInputFailure = 1;
constexpr int kNumericFailure = 2;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiply robust estimation of cause-specific CIF differences"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out;
    std::optional<std::string> input;
    app.add_option("--config", config_path, "run configuration file")->required();
    app.add_option("--seed", seed, "random seed");
    app.add_option("--threads", threads, "worker threads (0: all cores)");
    app.add_option("--out", out, "output path");
    app.add_option("--input", input, "input dataset CSV");

    auto* simulate = app.add_subcommand("simulate", "simulate a dataset from a scenario");
    auto* estimate = app.add_subcommand("estimate", "estimate effects on a dataset");
    auto* bench = app.add_subcommand("bench", "run the simulation benchmark");
    auto* pseudo = app.add_subcommand("pseudovalues", "export jackknife pseudo-values");
    for (auto* sub : {simulate, estimate, bench, pseudo}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kInputFailure;
    }

    try {
        mrcr::RunConfig config = mrcr::load_run_config(config_path);
        if (seed) config.seed = *seed;
        if (threads) config.threads = *threads;
        if (out) config.output_path = *out;
        if (input) config.input_path = *input;

        if (simulate->parsed()) mrcr::cmd_simulate(config);
        else if (estimate->parsed()) mrcr::cmd_estimate(config);
        else if (bench->parsed()) mrcr::cmd_bench(config, std::cout);
        else mrcr::cmd_pseudovalues(config);
    } catch (const mrcr::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kNumericFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputFailure;
    }
    return 0;
}
