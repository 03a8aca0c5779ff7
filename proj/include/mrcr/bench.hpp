#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mrcr/bootstrap.hpp"
#include "mrcr/config.hpp"
#include "mrcr/pipeline.hpp"
#include "mrcr/simulation.hpp"

namespace mrcr {

// Stream tags for the auxiliary Monte-Carlo draws of a bench run; each draws
// from derive_seed(seed, tag).
inline constexpr std::uint64_t kCalibrationStream = 0xC0FFEE;
inline constexpr std::uint64_t kTruthStream = 0x7A07;
inline constexpr std::uint64_t kEvalTimeStream = 0xE7A1;

struct BenchConfig {
    ScenarioConfig scenario;
    std::optional<double> censoring_rate;  // calibrated c_max; 0 disables censoring
    PipelineConfig pipeline;               // first eval time is used; empty -> median failure time of the cause
    int replicates = 200;
    int bootstrap = 200;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::size_t truth_mc = 1'000'000;
    std::size_t calibration_mc = 200'000;
    std::size_t eval_time_mc = 1'000'000;
    std::optional<double> truth;  // skips the oracle when set

    static BenchConfig from_run_config(const RunConfig& run);
};

struct BenchRow {
    std::string label;
    std::size_t used = 0;
    std::size_t failed = 0;
    double bias = 0.0;
    double mse = 0.0;
    double sd = 0.0;  // sample standard deviation; NaN with fewer than two replicates
    double coverage_normal = 0.0;
    double coverage_percentile = 0.0;
    double coverage_pivotal = 0.0;
    bool flagged = false;  // more than 5% of replicates failed

    bool sd_applicable() const;
};

struct ReplicateRecord {
    std::size_t replicate = 0;
    std::string label;
    double estimate = 0.0;  // NaN when the point estimate failed
    double variance = 0.0;
    Interval normal, percentile, pivotal;
    std::size_t bootstrap_failures = 0;
    std::string error;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::vector<ReplicateRecord> records;  // replicate-major, then label
    std::size_t n = 0;
    int replicates = 0;
    int bootstrap = 0;
    int cause = 1;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    std::optional<double> target_censoring;
    std::optional<double> censor_max;
    double realized_censoring = 0.0;
    double eval_time = 0.0;
    double truth = 0.0;
    double truth_se = 0.0;
    double runtime_seconds = 0.0;

    const BenchRow& row(const std::string& label) const;
};

// Applies a censoring-rate target: calibrates censor_max (rate > 0) or removes
// censoring (rate == 0). Without a target the scenario is returned unchanged.
ScenarioConfig resolve_scenario(const ScenarioConfig& scenario, std::optional<double> censoring_rate,
                                std::size_t n_mc, std::uint64_t seed);

// Seeds: replicate r simulates with seed + r and bootstraps with derive_seed(seed, r).
BenchReport run_bench(const BenchConfig& config);

// Aggregates per-replicate records into rows (labels in first-seen order).
std::vector<BenchRow> summarize_bench(const std::vector<ReplicateRecord>& records, double truth);

void write_bench_table(std::ostream& out, const BenchReport& report);
void write_bench_json(std::ostream& out, const BenchReport& report);
void write_bench_replicates_csv(std::ostream& out, const BenchReport& report);

}  // namespace mrcr
