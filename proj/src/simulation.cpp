#include "mrcr/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mrcr/errors.hpp"
#include "mrcr/rng.hpp"
#include "mrcr/survival.hpp"

namespace mrcr {

namespace {

struct Latent {
    double time;
    int cause;
};

double linear(const std::vector<double>& coef, const std::vector<double>& x) {
    double v = coef[0];
    for (std::size_t j = 0; j < x.size(); ++j) v += coef[j + 1] * x[j];
    return v;
}

void draw_covariates(Rng& rng, std::vector<double>& x) {
    for (auto& v : x) v = rng.normal();
}

// Latent failure: earliest cause-specific time, ties to the smaller cause.
Latent latent_failure(const ScenarioConfig& cfg, const std::vector<double>& x, int a,
                      const std::vector<double>& uniforms) {
    Latent best{std::numeric_limits<double>::infinity(), 0};
    for (int k = 0; k < cfg.num_causes; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const double lp = linear(cfg.covariate_effects[kk], x) + cfg.treatment_effects[kk] * a;
        const double t = gompertz_time(cfg.baseline_hazards[kk], cfg.time_effects[kk], lp, uniforms[kk]);
        if (t < best.time) best = {t, k + 1};
    }
    return best;
}

struct Draw {
    std::vector<double> x;
    int treatment;
    Latent failure;
    double censor_uniform;
};

Draw draw_subject(const ScenarioConfig& cfg, Rng& rng, std::vector<double>& uniforms) {
    Draw d;
    d.x.resize(cfg.p);
    draw_covariates(rng, d.x);
    const double eta = linear(cfg.ps_coefficients, d.x);
    d.treatment = rng.uniform() < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
    for (auto& u : uniforms) u = rng.uniform();
    d.failure = latent_failure(cfg, d.x, d.treatment, uniforms);
    d.censor_uniform = rng.uniform();
    return d;
}

}  // namespace

ScenarioConfig ScenarioConfig::standard() {
    ScenarioConfig c;
    c.num_causes = 2;
    c.p = 3;
    c.baseline_hazards = {0.5, 0.5};
    c.time_effects = {1.5, 1.5};
    c.treatment_effects = {1.0, 1.0};
    c.covariate_effects = {{0.4, 0.5, 0.2, -0.6}, {-0.2, -0.6, 0.4, -0.5}};
    c.ps_coefficients = {0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    return c;
}

void ScenarioConfig::validate() const {
    if (num_causes < 1) throw InputError("scenario: num_causes must be at least 1");
    const auto K = static_cast<std::size_t>(num_causes);
    if (baseline_hazards.size() != K || time_effects.size() != K || treatment_effects.size() != K ||
        covariate_effects.size() != K)
        throw InputError("scenario: per-cause parameter lists must have num_causes entries");
    for (std::size_t k = 0; k < K; ++k) {
        if (!(baseline_hazards[k] > 0.0)) throw InputError("scenario: baseline hazards must be positive");
        if (time_effects[k] == 0.0) throw InputError("scenario: time effects must be nonzero");
        if (covariate_effects[k].size() != p + 1)
            throw InputError("scenario: covariate effects need p + 1 entries (intercept first)");
    }
    if (ps_coefficients.size() != p + 1)
        throw InputError("scenario: propensity coefficients need p + 1 entries (intercept first)");
    if (censor_max && !(*censor_max > 0.0)) throw InputError("scenario: censor_max must be positive");
    if (n < 1) throw InputError("scenario: n must be positive");
}

double gompertz_time(double baseline, double time_effect, double linear_predictor, double uniform) {
    const double arg = 1.0 - time_effect * std::log(uniform) / (baseline * std::exp(linear_predictor));
    if (!(arg > 0.0)) throw NumericError("Gompertz inversion argument is not positive");
    const double t = std::log(arg) / time_effect;
    if (!(t > 0.0)) throw NumericError("Gompertz inversion produced a non-positive time");
    return t;
}

Dataset generate_dataset(const ScenarioConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    std::vector<double> uniforms(static_cast<std::size_t>(config.num_causes));
    std::vector<ObservedRecord> rows;
    rows.reserve(config.n);
    for (std::size_t i = 0; i < config.n; ++i) {
        auto d = draw_subject(config, rng, uniforms);
        ObservedRecord r;
        r.treatment = d.treatment;
        r.covariates = std::move(d.x);
        const double c = config.censor_max ? d.censor_uniform * *config.censor_max
                                           : std::numeric_limits<double>::infinity();
        if (d.failure.time <= c) {
            r.time = d.failure.time;
            r.status = d.failure.cause;
        } else {
            r.time = c;
            r.status = 0;
        }
        rows.push_back(std::move(r));
    }
    return Dataset(std::move(rows), config.num_causes);
}

double calibrate_cmax(const ScenarioConfig& config, double target_rate, std::size_t n_mc, std::uint64_t seed,
                      double tolerance) {
    config.validate();
    if (!(target_rate > 0.0 && target_rate < 1.0)) throw InputError("target censoring rate must lie in (0,1)");
    if (n_mc < 1) throw InputError("calibration sample size must be positive");
    Rng rng(seed);
    std::vector<double> uniforms(static_cast<std::size_t>(config.num_causes));
    std::vector<double> times(n_mc);
    for (auto& t : times) t = draw_subject(config, rng, uniforms).failure.time;

    auto rate = [&](double cmax) {
        double s = 0.0;
        for (double t : times) s += std::min(1.0, t / cmax);
        return s / static_cast<double>(times.size());
    };
    double lo = 0.01, hi = 100.0;  // rate decreases in c_max
    const double r_lo = rate(lo), r_hi = rate(hi);
    if (target_rate > r_lo || target_rate < r_hi)
        throw CalibrationError("censoring rate " + format_double(target_rate) + " is unreachable for c_max in [" +
                               format_double(lo) + ", " + format_double(hi) + "] (achievable range " +
                               format_double(r_hi) + " to " + format_double(r_lo) + ")");
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double r = rate(mid);
        if (std::abs(r - target_rate) < tolerance) return mid;
        if (r > target_rate)
            lo = mid;
        else
            hi = mid;
    }
    throw CalibrationError("censoring calibration did not reach the requested tolerance");
}

TruthEstimate true_delta_oracle(const ScenarioConfig& config, int cause, const std::vector<double>& eval_times,
                                std::size_t n_mc, std::uint64_t seed) {
    config.validate();
    if (cause < 1 || cause > config.num_causes) throw InputError("oracle: cause out of range");
    if (n_mc < 2) throw InputError("oracle: n_mc must be at least 2");
    Rng rng(seed);
    const auto E = eval_times.size();
    std::vector<double> sum(E, 0.0), sumsq(E, 0.0);
    std::vector<double> x(config.p), uniforms(static_cast<std::size_t>(config.num_causes));
    for (std::size_t s = 0; s < n_mc; ++s) {
        draw_covariates(rng, x);
        for (auto& u : uniforms) u = rng.uniform();
        const auto f1 = latent_failure(config, x, 1, uniforms);
        const auto f0 = latent_failure(config, x, 0, uniforms);
        for (std::size_t e = 0; e < E; ++e) {
            const double d = (f1.cause == cause && f1.time <= eval_times[e] ? 1.0 : 0.0) -
                             (f0.cause == cause && f0.time <= eval_times[e] ? 1.0 : 0.0);
            sum[e] += d;
            sumsq[e] += d * d;
        }
    }
    TruthEstimate out;
    const double n = static_cast<double>(n_mc);
    for (std::size_t e = 0; e < E; ++e) {
        const double mean = sum[e] / n;
        const double var = (sumsq[e] - n * mean * mean) / (n - 1.0);
        out.values.push_back(mean);
        out.standard_errors.push_back(std::sqrt(std::max(var, 0.0) / n));
    }
    return out;
}

double benchmark_eval_time(const ScenarioConfig& config, int cause, std::size_t n_mc, std::uint64_t seed) {
    auto cfg = config;
    cfg.censor_max.reset();
    cfg.validate();
    if (cause < 1 || cause > cfg.num_causes) throw InputError("cause out of range");
    Rng rng(seed);
    std::vector<double> uniforms(static_cast<std::size_t>(cfg.num_causes));
    std::vector<double> times;
    for (std::size_t s = 0; s < n_mc; ++s) {
        const auto d = draw_subject(cfg, rng, uniforms);
        if (d.failure.cause == cause) times.push_back(d.failure.time);
    }
    if (times.empty()) throw NumericError("no failures of the requested cause were simulated");
    return quantile_type7(std::move(times), 0.5);
}

}  // namespace mrcr
