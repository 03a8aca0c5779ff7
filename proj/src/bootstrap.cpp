#include "mrcr/bootstrap.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "mrcr/errors.hpp"
#include "mrcr/parallel.hpp"
#include "mrcr/rng.hpp"
#include "mrcr/survival.hpp"

namespace mrcr {

bool Interval::finite() const { return std::isfinite(lower) && std::isfinite(upper); }

double normal_upper_quantile(double alpha_half) {
    return boost::math::quantile(boost::math::complement(boost::math::normal(), alpha_half));
}

double bootstrap_variance(const std::vector<double>& estimates) {
    const auto B = estimates.size();
    if (B < 2) return std::numeric_limits<double>::quiet_NaN();
    // Shifted by the first value so identical replicates give exactly zero.
    const double shift = estimates.front();
    double mean = 0.0;
    for (double e : estimates) mean += e - shift;
    mean /= static_cast<double>(B);
    double ss = 0.0;
    for (double e : estimates) ss += (e - shift - mean) * (e - shift - mean);
    return ss / static_cast<double>(B - 1);
}

BootstrapResult summarize_bootstrap(double point_estimate, const std::vector<double>& replicates, double alpha,
                                    std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
    BootstrapResult r;
    r.point_estimate = point_estimate;
    r.alpha = alpha;
    r.seed = seed;
    for (std::size_t b = 0; b < replicates.size(); ++b) {
        if (std::isfinite(replicates[b]))
            r.replicate_estimates.push_back(replicates[b]);
        else
            r.failed_replicates.push_back(b);
    }
    r.degenerate = static_cast<double>(r.failed_replicates.size()) >
                   kMaxFailedShare * static_cast<double>(replicates.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (r.replicate_estimates.size() < 2) {
        r.degenerate = true;
        r.variance = nan;
        r.ci_normal = r.ci_percentile = r.ci_pivotal = {nan, nan};
        return r;
    }
    r.variance = bootstrap_variance(r.replicate_estimates);
    const double half = normal_upper_quantile(alpha / 2.0) * std::sqrt(r.variance);
    r.ci_normal = {point_estimate - half, point_estimate + half};
    const double lo = quantile_type7(r.replicate_estimates, alpha / 2.0);
    const double hi = quantile_type7(r.replicate_estimates, 1.0 - alpha / 2.0);
    r.ci_percentile = {lo, hi};
    r.ci_pivotal = {2.0 * point_estimate - hi, 2.0 * point_estimate - lo};
    return r;
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed, std::size_t replicate) {
    Rng rng(seed + replicate);
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = rng.index(n);
    return idx;
}

std::vector<BootstrapResult> bootstrap_multi(const Dataset& data, const MultiEstimator& estimator,
                                             const std::vector<double>& points, int B, double alpha,
                                             std::uint64_t seed, unsigned threads) {
    if (B < 2) throw InputError("bootstrap needs at least 2 replicates");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
    const auto outputs = points.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> table(static_cast<std::size_t>(B), std::vector<double>(outputs, nan));
    parallel_for(static_cast<std::size_t>(B), threads, [&](std::size_t b) {
        const auto idx = bootstrap_indices(data.size(), seed, b);
        try {
            auto values = estimator(data.subset(idx));
            if (values.size() == outputs) table[b] = std::move(values);
        } catch (const std::exception&) {
            // replicate fails as a whole
        }
    });
    std::vector<BootstrapResult> results;
    results.reserve(outputs);
    std::vector<double> column(static_cast<std::size_t>(B));
    for (std::size_t k = 0; k < outputs; ++k) {
        for (std::size_t b = 0; b < column.size(); ++b) column[b] = table[b][k];
        results.push_back(summarize_bootstrap(points[k], column, alpha, seed));
    }
    return results;
}

}  // namespace mrcr
