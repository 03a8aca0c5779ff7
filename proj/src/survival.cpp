#include "mrcr/survival.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mrcr/errors.hpp"

namespace mrcr {

namespace {

// Counts at each distinct observed time, ascending.
struct RiskTable {
    std::vector<double> times;
    std::vector<double> at_risk;
    std::vector<double> failures;
    std::vector<double> cause_failures;
    std::vector<double> censored;
    std::vector<std::size_t> slot;  // record -> distinct-time index
};

RiskTable tabulate(const Dataset& data, int cause) {
    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return data[a].time < data[b].time; });

    RiskTable tab;
    tab.slot.resize(n);
    for (std::size_t k = 0; k < n;) {
        const double t = data[order[k]].time;
        double d = 0, dk = 0, c = 0;
        const auto idx = tab.times.size();
        std::size_t k2 = k;
        for (; k2 < n && data[order[k2]].time == t; ++k2) {
            const auto& r = data[order[k2]];
            tab.slot[order[k2]] = idx;
            if (r.status == 0) {
                c += 1;
            } else {
                d += 1;
                if (r.status == cause) dk += 1;
            }
        }
        tab.times.push_back(t);
        tab.at_risk.push_back(static_cast<double>(n - k));
        tab.failures.push_back(d);
        tab.cause_failures.push_back(dk);
        tab.censored.push_back(c);
        k = k2;
    }
    return tab;
}

void check_cause(const Dataset& data, int cause) {
    if (cause < 1 || cause > data.num_causes())
        throw InputError("cause " + std::to_string(cause) + " outside 1.." + std::to_string(data.num_causes()));
}

void check_grid(std::span<const double> grid) {
    if (grid.empty()) throw InputError("time grid is empty");
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (!(grid[j] > 0.0) || !std::isfinite(grid[j])) throw InputError("time grid points must be positive");
        if (j > 0 && !(grid[j] > grid[j - 1])) throw InputError("time grid must be strictly increasing");
    }
}

// Index of the last distinct time <= t, or -1.
std::ptrdiff_t last_at_or_before(const std::vector<double>& times, double t) {
    return std::upper_bound(times.begin(), times.end(), t) - times.begin() - 1;
}

}  // namespace

StepFunction km_censoring_survival(const Dataset& data) {
    if (data.empty()) throw InputError("km_censoring_survival: empty dataset");
    const auto tab = tabulate(data, 1);
    std::vector<double> jumps, values;
    double g = 1.0;
    for (std::size_t a = 0; a < tab.times.size(); ++a) {
        if (tab.censored[a] == 0) continue;
        // failures at this time have already left the censoring risk set
        const double risk = tab.at_risk[a] - tab.failures[a];
        g *= 1.0 - tab.censored[a] / risk;
        jumps.push_back(tab.times[a]);
        values.push_back(g);
    }
    return StepFunction(1.0, std::move(jumps), std::move(values));
}

StepFunction ipcw_cif(const Dataset& data, int cause) {
    if (data.empty()) throw InputError("ipcw_cif: empty dataset");
    check_cause(data, cause);
    const auto g = km_censoring_survival(data);
    const auto tab = tabulate(data, cause);
    const double n = static_cast<double>(data.size());
    std::vector<double> jumps, values;
    double f = 0.0;
    for (std::size_t a = 0; a < tab.times.size(); ++a) {
        if (tab.cause_failures[a] == 0) continue;
        const double g_left = g.value_left(tab.times[a]);
        if (!(g_left > 0.0))
            throw DegenerateRiskSetError(
                "censoring survival is zero just before failure time " + format_double(tab.times[a]),
                tab.times[a]);
        f += tab.cause_failures[a] / (n * g_left);
        jumps.push_back(tab.times[a]);
        values.push_back(f);
    }
    return StepFunction(0.0, std::move(jumps), std::move(values));
}

PseudoValueMatrix jackknife_pseudovalues(const Dataset& data, int cause, std::span<const double> time_grid) {
    check_cause(data, cause);
    check_grid(time_grid);
    if (data.size() < 2) throw InputError("jackknife needs at least two records");

    const auto tab = tabulate(data, cause);
    const std::size_t m = tab.times.size();
    const auto& R = tab.at_risk;
    const auto& d = tab.failures;
    const auto& dk = tab.cause_failures;
    const auto& c = tab.censored;

    // Full sample: G(t_a-), G(t_a), and n * F_k(t_a).
    std::vector<double> g_left(m), g_at(m), nf(m);
    // Leave-one-out prefix for subjects still at risk past t_a: product of
    // censoring factors with one fewer subject at risk, and the matching
    // accumulated CIF numerator.
    std::vector<double> loo_prefix(m + 1), loo_acc(m + 1);
    {
        double g = 1.0, sum = 0.0, pm = 1.0, acc = 0.0;
        for (std::size_t a = 0; a < m; ++a) {
            g_left[a] = g;
            if (c[a] > 0) g *= 1.0 - c[a] / (R[a] - d[a]);
            g_at[a] = g;
            if (dk[a] > 0) sum += dk[a] / g_left[a];
            nf[a] = sum;

            loo_prefix[a] = pm;
            loo_acc[a] = acc;
            if (dk[a] > 0) acc = pm > 0.0 ? acc + dk[a] / pm : std::numeric_limits<double>::infinity();
            const double risk = R[a] - 1.0 - d[a];
            if (risk > 0.0) pm *= std::max(0.0, 1.0 - c[a] / risk);
        }
        loo_prefix[m] = pm;
        loo_acc[m] = acc;
    }

    const std::size_t h = time_grid.size();
    std::vector<std::ptrdiff_t> grid_slot(h);
    for (std::size_t j = 0; j < h; ++j) grid_slot[j] = last_at_or_before(tab.times, time_grid[j]);

    PseudoValueMatrix out;
    out.values.resize(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(h));
    out.time_grid.assign(time_grid.begin(), time_grid.end());
    out.cause = cause;

    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& rec = data[i];
        const std::size_t a = tab.slot[i];
        const double d_minus = d[a] - (rec.status > 0 ? 1.0 : 0.0);
        const double c_minus = c[a] - (rec.status == 0 ? 1.0 : 0.0);
        const double dk_minus = dk[a] - (rec.status == cause ? 1.0 : 0.0);
        const double risk_minus = R[a] - 1.0 - d_minus;
        const double factor_i = risk_minus > 0.0 ? 1.0 - c_minus / risk_minus : 1.0;
        const double remaining = R[a] - d[a] - c[a];

        auto degenerate = [&] {
            return DegenerateRiskSetError("leave-one-out censoring survival is zero for subject " +
                                              std::to_string(i + 1),
                                          rec.time);
        };

        for (std::size_t j = 0; j < h; ++j) {
            const auto ta = grid_slot[j];
            const double full = ta >= 0 ? nf[static_cast<std::size_t>(ta)] : 0.0;
            double loo;  // (n - 1) * F_k^(-i)(t_j)
            if (ta < static_cast<std::ptrdiff_t>(a)) {
                loo = loo_acc[static_cast<std::size_t>(ta + 1)];
            } else {
                loo = loo_acc[a];
                if (dk_minus > 0) {
                    if (!(loo_prefix[a] > 0.0)) throw degenerate();
                    loo += dk_minus / loo_prefix[a];
                }
                if (ta > static_cast<std::ptrdiff_t>(a) && remaining > 0) {
                    const double denom = loo_prefix[a] * factor_i;
                    if (!(denom > 0.0)) throw degenerate();
                    loo += g_at[a] / denom * (nf[static_cast<std::size_t>(ta)] - nf[a]);
                }
            }
            if (!std::isfinite(loo)) throw degenerate();
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = full - loo;
        }
    }
    return out;
}

PseudoValueMatrix jackknife_pseudovalues_bruteforce(const Dataset& data, int cause,
                                                    std::span<const double> time_grid) {
    check_cause(data, cause);
    check_grid(time_grid);
    if (data.size() < 2) throw InputError("jackknife needs at least two records");
    const double n = static_cast<double>(data.size());
    const auto full = ipcw_cif(data, cause);

    PseudoValueMatrix out;
    out.values.resize(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(time_grid.size()));
    out.time_grid.assign(time_grid.begin(), time_grid.end());
    out.cause = cause;
    for (std::size_t i = 0; i < data.size(); ++i) {
        StepFunction loo;
        try {
            loo = ipcw_cif(data.without(i), cause);
        } catch (const DegenerateRiskSetError& e) {
            throw DegenerateRiskSetError("subject " + std::to_string(i + 1) + ": " + e.what(), e.time());
        }
        for (std::size_t j = 0; j < time_grid.size(); ++j)
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                n * full(time_grid[j]) - (n - 1.0) * loo(time_grid[j]);
    }
    return out;
}

double quantile_type7(std::vector<double> sample, double prob) {
    if (sample.empty()) throw InputError("quantile of an empty sample");
    if (!(prob >= 0.0 && prob <= 1.0)) throw InputError("quantile probability outside [0,1]");
    std::sort(sample.begin(), sample.end());
    const double pos = (static_cast<double>(sample.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= sample.size()) return sample.back();
    const double frac = pos - static_cast<double>(lo);
    return sample[lo] + frac * (sample[lo + 1] - sample[lo]);
}

std::vector<double> default_time_grid(const Dataset& data, int cause) {
    check_cause(data, cause);
    std::vector<double> failures;
    for (const auto& r : data.records())
        if (r.status == cause) failures.push_back(r.time);
    if (failures.empty()) throw InputError("no observed failures of cause " + std::to_string(cause));
    std::vector<double> grid;
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) grid.push_back(quantile_type7(failures, p));
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

}  // namespace mrcr
