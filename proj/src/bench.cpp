#include "mrcr/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>

#include <json.hpp>

#include "mrcr/errors.hpp"
#include "mrcr/parallel.hpp"
#include "mrcr/rng.hpp"

namespace mrcr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c == '\n' ? ' ' : c;
    }
    return q + '"';
}

}  // namespace

BenchConfig BenchConfig::from_run_config(const RunConfig& run) {
    if (!run.scenario) throw InputError("bench needs a [scenario] section");
    BenchConfig b;
    b.scenario = *run.scenario;
    b.censoring_rate = run.censoring_rate;
    b.pipeline = run.pipeline;
    b.replicates = run.replicates;
    b.bootstrap = run.bootstrap;
    b.alpha = run.alpha;
    b.seed = run.seed;
    b.threads = run.threads == 0 ? default_thread_count() : run.threads;
    b.truth_mc = run.truth_mc;
    b.calibration_mc = run.calibration_mc;
    b.eval_time_mc = run.eval_time_mc;
    return b;
}

ScenarioConfig resolve_scenario(const ScenarioConfig& scenario, std::optional<double> censoring_rate,
                                std::size_t n_mc, std::uint64_t seed) {
    ScenarioConfig out = scenario;
    if (!censoring_rate) return out;
    if (*censoring_rate > 0.0)
        out.censor_max = calibrate_cmax(scenario, *censoring_rate, n_mc, derive_seed(seed, kCalibrationStream));
    else
        out.censor_max.reset();
    return out;
}

bool BenchRow::sd_applicable() const { return std::isfinite(sd); }

const BenchRow& BenchReport::row(const std::string& label) const {
    for (const auto& r : rows)
        if (r.label == label) return r;
    throw InputError("no bench row '" + label + "'");
}

std::vector<BenchRow> summarize_bench(const std::vector<ReplicateRecord>& records, double truth) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<const ReplicateRecord*>> by_label;
    for (const auto& r : records) {
        if (!by_label.count(r.label)) order.push_back(r.label);
        by_label[r.label].push_back(&r);
    }
    std::vector<BenchRow> rows;
    for (const auto& label : order) {
        BenchRow row;
        row.label = label;
        std::vector<double> est;
        std::size_t cov_n = 0, cov_p = 0, cov_v = 0;
        for (const auto* r : by_label[label]) {
            if (!std::isfinite(r->estimate) || !r->normal.finite()) {
                ++row.failed;
                continue;
            }
            est.push_back(r->estimate);
            cov_n += r->normal.contains(truth);
            cov_p += r->percentile.contains(truth);
            cov_v += r->pivotal.contains(truth);
        }
        row.used = est.size();
        row.flagged = static_cast<double>(row.failed) > kMaxFailedShare * static_cast<double>(row.used + row.failed);
        if (est.empty()) {
            row.bias = row.mse = row.sd = kNaN;
            row.coverage_normal = row.coverage_percentile = row.coverage_pivotal = kNaN;
            rows.push_back(row);
            continue;
        }
        const double m = static_cast<double>(est.size());
        double mean = 0.0, mse = 0.0;
        for (double e : est) {
            mean += e;
            mse += (e - truth) * (e - truth);
        }
        mean /= m;
        double ss = 0.0;
        for (double e : est) ss += (e - mean) * (e - mean);
        row.bias = mean - truth;
        row.mse = mse / m;
        row.sd = est.size() >= 2 ? std::sqrt(ss / (m - 1.0)) : kNaN;
        row.coverage_normal = 100.0 * static_cast<double>(cov_n) / m;
        row.coverage_percentile = 100.0 * static_cast<double>(cov_p) / m;
        row.coverage_pivotal = 100.0 * static_cast<double>(cov_v) / m;
        rows.push_back(row);
    }
    return rows;
}

BenchReport run_bench(const BenchConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    if (config.replicates < 1) throw InputError("bench needs at least one replicate");
    if (config.pipeline.estimators.empty()) throw InputError("bench needs at least one estimator");

    BenchReport report;
    report.n = config.scenario.n;
    report.replicates = config.replicates;
    report.bootstrap = config.bootstrap;
    report.cause = config.pipeline.cause;
    report.alpha = config.alpha;
    report.seed = config.seed;

    const ScenarioConfig scenario =
        resolve_scenario(config.scenario, config.censoring_rate, config.calibration_mc, config.seed);
    report.target_censoring = config.censoring_rate;
    report.censor_max = scenario.censor_max;

    PipelineConfig pipeline = config.pipeline;
    if (pipeline.eval_times.empty())
        pipeline.eval_times = {benchmark_eval_time(scenario, pipeline.cause, config.eval_time_mc,
                                                   derive_seed(config.seed, kEvalTimeStream))};
    pipeline.eval_times.resize(1);
    report.eval_time = pipeline.eval_times.front();

    if (config.truth) {
        report.truth = *config.truth;
        report.truth_se = 0.0;
    } else {
        const auto t = true_delta_oracle(scenario, pipeline.cause, pipeline.eval_times, config.truth_mc,
                                         derive_seed(config.seed, kTruthStream));
        report.truth = t.values.front();
        report.truth_se = t.standard_errors.front();
    }

    const auto R = static_cast<std::size_t>(config.replicates);
    const auto L = pipeline.estimators.size();
    std::vector<ReplicateRecord> records(R * L);
    std::vector<double> censored(R, 0.0);
    parallel_for(R, config.threads, [&](std::size_t r) {
        for (std::size_t l = 0; l < L; ++l) {
            auto& rec = records[r * L + l];
            rec.replicate = r;
            rec.label = pipeline.estimators[l].text;
            rec.estimate = rec.variance = kNaN;
            rec.normal = rec.percentile = rec.pivotal = {kNaN, kNaN};
        }
        const auto data = generate_dataset(scenario, config.seed + r);
        std::size_t c = 0;
        for (const auto& row : data.records()) c += row.status == 0;
        censored[r] = static_cast<double>(c) / static_cast<double>(data.size());
        try {
            const auto boot = bootstrap_pipeline(data, pipeline, config.bootstrap, config.alpha,
                                                 derive_seed(config.seed, r), 1);
            for (std::size_t l = 0; l < L; ++l) {
                auto& rec = records[r * L + l];
                const auto& out = boot.point.outcomes[l];
                if (!out.estimate) {
                    rec.error = out.error;
                    continue;
                }
                const auto& ci = boot.intervals[l];
                rec.estimate = out.estimate->value;
                rec.variance = ci.variance;
                rec.normal = ci.ci_normal;
                rec.percentile = ci.ci_percentile;
                rec.pivotal = ci.ci_pivotal;
                rec.bootstrap_failures = ci.failed_replicates.size();
            }
        } catch (const std::exception& e) {
            for (std::size_t l = 0; l < L; ++l) records[r * L + l].error = e.what();
        }
    });

    double total = 0.0;
    for (double c : censored) total += c;
    report.realized_censoring = total / static_cast<double>(R);
    report.records = std::move(records);
    report.rows = summarize_bench(report.records, report.truth);
    report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

void write_bench_table(std::ostream& out, const BenchReport& rep) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "n=%zu replicates=%d B=%d cause=%d t=%.6g truth=%.6f (MC se %.2g)", rep.n,
                  rep.replicates, rep.bootstrap, rep.cause, rep.eval_time, rep.truth, rep.truth_se);
    out << buf << '\n';
    std::snprintf(buf, sizeof buf, "censoring: target=%s realized=%.4f c_max=%s runtime=%.1fs",
                  rep.target_censoring ? format_double(*rep.target_censoring).c_str() : "n/a",
                  rep.realized_censoring, rep.censor_max ? format_double(*rep.censor_max).c_str() : "none",
                  rep.runtime_seconds);
    out << buf << '\n';
    std::snprintf(buf, sizeof buf, "%-16s %10s %10s %8s %7s %7s %7s %6s", "Model", "Bias", "MSE(e-3)", "SD", "CR.nor",
                  "CR.per", "CR.piv", "Fail");
    out << buf << '\n';
    for (const auto& r : rep.rows) {
        const std::string sd = r.sd_applicable() ? [&] {
            char s[32];
            std::snprintf(s, sizeof s, "%.4f", r.sd);
            return std::string(s);
        }()
                                                 : std::string("n/a");
        std::snprintf(buf, sizeof buf, "%-16s %10.5f %10.4f %8s %7.1f %7.1f %7.1f %5zu%s", r.label.c_str(), r.bias,
                      r.mse * 1e3, sd.c_str(), r.coverage_normal, r.coverage_percentile, r.coverage_pivotal, r.failed,
                      r.flagged ? "!" : "");
        out << buf << '\n';
    }
}

void write_bench_json(std::ostream& out, const BenchReport& rep) {
    using nlohmann::json;
    json j;
    j["n"] = rep.n;
    j["replicates"] = rep.replicates;
    j["bootstrap"] = rep.bootstrap;
    j["cause"] = rep.cause;
    j["alpha"] = rep.alpha;
    j["seed"] = rep.seed;
    j["target_censoring"] = rep.target_censoring ? json(*rep.target_censoring) : json(nullptr);
    j["censor_max"] = rep.censor_max ? json(*rep.censor_max) : json(nullptr);
    j["realized_censoring"] = rep.realized_censoring;
    j["eval_time"] = rep.eval_time;
    j["truth"] = rep.truth;
    j["truth_se"] = rep.truth_se;
    j["runtime_seconds"] = rep.runtime_seconds;
    j["rows"] = json::array();
    for (const auto& r : rep.rows) {
        json row;
        row["label"] = r.label;
        row["used"] = r.used;
        row["failed"] = r.failed;
        row["flagged"] = r.flagged;
        row["bias"] = r.bias;
        row["mse"] = r.mse;
        row["sd"] = r.sd_applicable() ? json(r.sd) : json("n/a");
        row["coverage_normal"] = r.coverage_normal;
        row["coverage_percentile"] = r.coverage_percentile;
        row["coverage_pivotal"] = r.coverage_pivotal;
        j["rows"].push_back(row);
    }
    out << j.dump(2) << '\n';
}

void write_bench_replicates_csv(std::ostream& out, const BenchReport& rep) {
    out << "replicate,label,estimate,variance,normal_lower,normal_upper,percentile_lower,percentile_upper,"
           "pivotal_lower,pivotal_upper,bootstrap_failures,truth,error\n";
    for (const auto& r : rep.records) {
        out << r.replicate + 1 << ',' << r.label << ',' << format_double(r.estimate) << ','
            << format_double(r.variance) << ',' << format_double(r.normal.lower) << ','
            << format_double(r.normal.upper) << ',' << format_double(r.percentile.lower) << ','
            << format_double(r.percentile.upper) << ',' << format_double(r.pivotal.lower) << ','
            << format_double(r.pivotal.upper) << ',' << r.bootstrap_failures << ',' << format_double(rep.truth)
            << ',' << csv_field(r.error) << '\n';
    }
}

}  // namespace mrcr
