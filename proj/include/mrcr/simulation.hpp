#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mrcr/dataset.hpp"

namespace mrcr {

// Competing-risks generator with Gompertz cause-specific hazards
//   h_k(t | X, A) = a_k exp(xi_k'(1, X) + lambda_k A) exp(rho_k t),
// logistic treatment assignment and uniform(0, c_max) censoring.
struct ScenarioConfig {
    int num_causes = 2;
    std::vector<double> baseline_hazards;              // a_k > 0
    std::vector<double> time_effects;                  // rho_k != 0
    std::vector<double> treatment_effects;             // lambda_k
    std::vector<std::vector<double>> covariate_effects;  // xi_k, intercept first, length p + 1
    std::vector<double> ps_coefficients;               // logit pi(X), intercept first, length p + 1
    std::optional<double> censor_max;                  // none: no censoring
    std::size_t n = 500;
    std::size_t p = 3;

    // Three standard-normal covariates, two causes with a_k = 0.5, lambda_k = 1,
    // rho_k = 1.5, xi_1 = (0.4, 0.5, 0.2, -0.6), xi_2 = (-0.2, -0.6, 0.4, -0.5),
    // logit pi = (X1 + X2 + X3) / 3.
    static ScenarioConfig standard();

    void validate() const;
};

// Draw order per subject: p covariate normals, one treatment uniform, K cause
// uniforms, one censoring uniform (always drawn).
Dataset generate_dataset(const ScenarioConfig& config, std::uint64_t seed);

// Gompertz inverse-transform draw; asserts the log argument exceeds zero.
double gompertz_time(double baseline, double time_effect, double linear_predictor, double uniform);

// Chooses c_max so that P(C < T) matches target_rate. Latent times are drawn once;
// the censoring rate at a given c_max is estimated by mean(min(1, T_i / c_max)),
// and bisection runs over [0.01, 100].
double calibrate_cmax(const ScenarioConfig& config, double target_rate, std::size_t n_mc, std::uint64_t seed,
                      double tolerance = 1e-4);

struct TruthEstimate {
    std::vector<double> values;
    std::vector<double> standard_errors;
};

// Counterfactual Monte-Carlo CIF difference: each covariate draw is evaluated
// under A = 1 and A = 0 with the same cause uniforms and no censoring.
// Draw order per pair: p covariate normals, K cause uniforms.
TruthEstimate true_delta_oracle(const ScenarioConfig& config, int cause, const std::vector<double>& eval_times,
                                std::size_t n_mc, std::uint64_t seed);

// Median observed failure time of a cause when nothing is censored.
double benchmark_eval_time(const ScenarioConfig& config, int cause, std::size_t n_mc, std::uint64_t seed);

}  // namespace mrcr
