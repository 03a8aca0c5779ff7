#include "mrcr/commands.hpp"

#include <fstream>
#include <iostream>

#include "mrcr/errors.hpp"
#include "mrcr/parallel.hpp"
#include "mrcr/survival.hpp"

namespace mrcr {

namespace {

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    return out;
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw InputError("write to '" + path + "' failed");
}

template <class Writer>
void write_to(const std::string& path, Writer&& writer) {
    if (path.empty()) {
        writer(std::cout);
        std::cout.flush();
        return;
    }
    auto out = open_output(path);
    writer(out);
    finish(out, path);
}

Dataset load_input(const RunConfig& config) {
    if (config.input_path.empty()) throw InputError("no input file given");
    return read_dataset_csv_file(config.input_path, 0);
}

unsigned threads_of(const RunConfig& config) {
    return config.threads == 0 ? default_thread_count() : config.threads;
}

PipelineConfig estimation_config(const Dataset& data, const RunConfig& config) {
    PipelineConfig p = config.pipeline;
    if (p.cause < 1 || p.cause > data.num_causes())
        throw InputError("cause " + std::to_string(p.cause) + " not present in the data");
    if (p.eval_times.empty()) throw InputError("no eval_times given");
    if (p.estimators.empty()) p.estimators = p.models.empty() ? std::vector{EstimatorLabel::parse("naive")}
                                                              : table_labels(p.models);
    for (const auto& m : p.models) m.features.validate(data.covariate_dim());
    p.validate();
    return p;
}

}  // namespace

void cmd_simulate(const RunConfig& config) {
    if (!config.scenario) throw InputError("simulate needs a [scenario] section");
    if (config.output_path.empty()) throw InputError("simulate needs an output path");
    RunConfig resolved = config;
    resolved.scenario = resolve_scenario(*config.scenario, config.censoring_rate, config.calibration_mc, config.seed);
    resolved.censoring_rate.reset();
    resolved.scenario->validate();
    const Dataset data = generate_dataset(*resolved.scenario, config.seed);
    write_to(config.output_path, [&](std::ostream& o) { write_dataset_csv(o, data); });
    write_to(config.output_path + ".config", [&](std::ostream& o) { write_run_config(o, resolved); });
}

nlohmann::json estimate_report(const Dataset& data, const RunConfig& config) {
    using nlohmann::json;
    const PipelineConfig p = estimation_config(data, config);
    const auto boot = bootstrap_pipeline(data, p, config.bootstrap, config.alpha, config.seed, threads_of(config));

    json j;
    j["n"] = data.size();
    j["cause"] = p.cause;
    j["bootstrap"] = config.bootstrap;
    j["alpha"] = config.alpha;
    j["seed"] = config.seed;
    j["time_grid"] = boot.point.grid;
    j["estimates"] = json::array();
    for (std::size_t i = 0; i < boot.point.outcomes.size(); ++i) {
        const auto& out = boot.point.outcomes[i];
        json e;
        e["label"] = out.label;
        e["eval_time"] = out.eval_time;
        if (!out.estimate) {
            e["error"] = out.error;
            j["estimates"].push_back(e);
            continue;
        }
        const auto& ci = boot.intervals[i];
        e["method"] = to_string(out.estimate->method);
        e["estimate"] = out.estimate->value;
        e["variance"] = ci.variance;
        e["ci_normal"] = json::array({ci.ci_normal.lower, ci.ci_normal.upper});
        e["ci_percentile"] = json::array({ci.ci_percentile.lower, ci.ci_percentile.upper});
        e["ci_pivotal"] = json::array({ci.ci_pivotal.lower, ci.ci_pivotal.upper});
        e["bootstrap_failures"] = ci.failed_replicates.size();
        e["degenerate"] = ci.degenerate;
        if (!out.estimate->notes.empty()) e["notes"] = out.estimate->notes;
        j["estimates"].push_back(e);
    }
    return j;
}

void cmd_estimate(const RunConfig& config) {
    const Dataset data = load_input(config);
    const auto report = estimate_report(data, config);
    write_to(config.output_path, [&](std::ostream& o) { o << report.dump(2) << '\n'; });
}

BenchReport cmd_bench(const RunConfig& config, std::ostream& table_out) {
    BenchConfig b = BenchConfig::from_run_config(config);
    if (b.pipeline.estimators.empty()) b.pipeline.estimators = table_labels(b.pipeline.models);
    for (const auto& m : b.pipeline.models) m.features.validate(static_cast<int>(b.scenario.p));
    {
        // eval time may still be resolved from the scenario
        PipelineConfig check = b.pipeline;
        if (check.eval_times.empty()) check.eval_times = {1.0};
        check.validate();
    }
    if (!config.output_path.empty()) {
        // Fail on an unwritable path before the long run.
        open_output(config.output_path);
    }
    const BenchReport report = run_bench(b);
    write_bench_table(table_out, report);
    if (!config.output_path.empty()) {
        write_to(config.output_path, [&](std::ostream& o) { write_bench_json(o, report); });
        write_to(config.output_path + ".replicates.csv",
                 [&](std::ostream& o) { write_bench_replicates_csv(o, report); });
    }
    return report;
}

void write_pseudovalues_csv(std::ostream& out, const PseudoValueMatrix& pv) {
    out << "id";
    for (double t : pv.time_grid) out << ',' << format_double(t);
    out << '\n';
    for (Eigen::Index i = 0; i < pv.values.rows(); ++i) {
        out << i + 1;
        for (Eigen::Index j = 0; j < pv.values.cols(); ++j) out << ',' << format_double(pv.values(i, j));
        out << '\n';
    }
}

void cmd_pseudovalues(const RunConfig& config) {
    const Dataset data = load_input(config);
    const int cause = config.pipeline.cause;
    if (cause < 1 || cause > data.num_causes())
        throw InputError("cause " + std::to_string(cause) + " not present in the data");
    std::vector<double> grid = config.pipeline.time_grid;
    if (grid.empty()) grid = config.pipeline.eval_times;
    if (grid.empty()) grid = default_time_grid(data, cause);
    const auto pv = jackknife_pseudovalues(data, cause, grid);
    write_to(config.output_path, [&](std::ostream& o) { write_pseudovalues_csv(o, pv); });
}

}  // namespace mrcr
