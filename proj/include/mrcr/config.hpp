#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "mrcr/pipeline.hpp"
#include "mrcr/simulation.hpp"

namespace mrcr {

// Run configuration read from a sectioned key/value file:
//
//   # comment
//   [run]          input, output, seed, threads
//   [scenario]     preset = "standard", n, p, num_causes, baseline_hazards,
//                  time_effects, treatment_effects, covariate_effects,
//                  ps_coefficients, censor_max, censoring_rate
//   [estimation]   cause, eval_times, time_grid, estimators, bootstrap, alpha
//   [bench]        replicates, truth_mc, calibration_mc, eval_time_mc
//   [model.p1]     terms = ["x1", "x1*x2", "x2^2", "exp(x3)"]
//
// Values are JSON literals (numbers, "strings", true/false, null, [arrays]).
// `estimators = "table"` expands to the standard menu for the defined models.
struct RunConfig {
    std::string input_path;
    std::string output_path;
    std::optional<ScenarioConfig> scenario;
    std::optional<double> censoring_rate;  // calibrates censor_max when set
    PipelineConfig pipeline;
    int bootstrap = 200;
    int replicates = 200;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0: hardware concurrency
    std::size_t truth_mc = 1'000'000;
    std::size_t calibration_mc = 200'000;
    std::size_t eval_time_mc = 1'000'000;
};

RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);

// Writes a config that reproduces `config` (scenario resolved, models expanded).
void write_run_config(std::ostream& out, const RunConfig& config);

}  // namespace mrcr
