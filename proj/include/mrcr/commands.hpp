#pragma once

#include <iosfwd>

#include <json.hpp>

#include "mrcr/bench.hpp"
#include "mrcr/config.hpp"
#include "mrcr/dataset.hpp"

namespace mrcr {

// Writes the simulated dataset to output_path and the resolved config to
// output_path + ".config".
void cmd_simulate(const RunConfig& config);

// Point estimates, bootstrap variances and intervals for every estimator label
// and eval time, written as JSON to output_path (stdout when empty).
void cmd_estimate(const RunConfig& config);
nlohmann::json estimate_report(const Dataset& data, const RunConfig& config);

// Table to `table_out`; JSON report to output_path and the per-replicate dump
// to output_path + ".replicates.csv" when output_path is set.
BenchReport cmd_bench(const RunConfig& config, std::ostream& table_out);

// Pseudo-value matrix as CSV: id followed by one column per grid time. The grid
// is time_grid, else eval_times, else the default percentile grid.
void cmd_pseudovalues(const RunConfig& config);
void write_pseudovalues_csv(std::ostream& out, const PseudoValueMatrix& pv);

}  // namespace mrcr
