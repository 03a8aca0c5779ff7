#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mrcr/dataset.hpp"

namespace mrcr {

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
    bool contains(double x) const { return lower <= x && x <= upper; }
    bool finite() const;
};

struct BootstrapResult {
    double point_estimate = 0.0;
    std::vector<double> replicate_estimates;  // successful replicates, in replicate order
    std::vector<std::size_t> failed_replicates;
    double variance = 0.0;
    Interval ci_normal, ci_percentile, ci_pivotal;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    bool degenerate = false;  // more than 5% of replicates failed

    std::size_t replicates() const { return replicate_estimates.size() + failed_replicates.size(); }
};

// Share of failed replicates above which a result is flagged.
inline constexpr double kMaxFailedShare = 0.05;

double normal_upper_quantile(double alpha_half);

// Sample variance with divisor (B - 1), two-pass.
double bootstrap_variance(const std::vector<double>& estimates);

// Builds the three intervals from a point estimate and replicate estimates
// (NaN marks a failed replicate). Quantiles use type-7 interpolation; the normal
// interval is centred at the point estimate.
BootstrapResult summarize_bootstrap(double point_estimate, const std::vector<double>& replicates, double alpha,
                                    std::uint64_t seed = 0);

// Resample indices for replicate b: Rng(seed + b) draws n indices in order.
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed, std::size_t replicate);

// Runs `estimator` on B resamples. The estimator returns one value per output
// (NaN when that output failed); an exception fails every output of that replicate.
// `points` holds the original-sample estimates, one per output.
using MultiEstimator = std::function<std::vector<double>(const Dataset&)>;
std::vector<BootstrapResult> bootstrap_multi(const Dataset& data, const MultiEstimator& estimator,
                                             const std::vector<double>& points, int B, double alpha,
                                             std::uint64_t seed, unsigned threads = 1);

}  // namespace mrcr
