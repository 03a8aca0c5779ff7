#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mrcr/dataset.hpp"
#include "mrcr/estimators.hpp"
#include "mrcr/features.hpp"
#include "mrcr/gee.hpp"
#include "mrcr/logistic.hpp"
#include "mrcr/rng.hpp"
#include "mrcr/simulation.hpp"

namespace support {

inline mrcr::Dataset make_data(const std::vector<double>& times, const std::vector<int>& status,
                               std::vector<int> treatment = {}, int num_causes = 2) {
    if (treatment.empty()) treatment.assign(times.size(), 0);
    std::vector<mrcr::ObservedRecord> rows;
    for (std::size_t i = 0; i < times.size(); ++i)
        rows.push_back({times[i], status[i], treatment[i], {static_cast<double>(i % 3)}});
    return mrcr::Dataset(std::move(rows), num_causes);
}

// Two causes, two covariates. `tie_levels` > 0 rounds times onto that many
// distinct values so ties between failures and censorings are common.
inline mrcr::Dataset random_dataset(std::uint64_t seed, std::size_t n, double censor_share, int tie_levels = 0) {
    mrcr::Rng rng(seed);
    std::vector<mrcr::ObservedRecord> rows;
    for (std::size_t i = 0; i < n; ++i) {
        mrcr::ObservedRecord r;
        r.time = rng.uniform() * 5.0;
        if (tie_levels > 0) r.time = std::ceil(r.time * tie_levels / 5.0);
        r.status = rng.uniform() < censor_share ? 0 : (rng.uniform() < 0.6 ? 1 : 2);
        r.treatment = rng.uniform() < 0.5 ? 1 : 0;
        r.covariates = {rng.normal(), rng.normal()};
        rows.push_back(std::move(r));
    }
    return mrcr::Dataset(std::move(rows), 2);
}

// Aalen-Johansen: sum over failure times u <= t of S(u-) d_k(u) / Y(u), with S
// the all-cause Kaplan-Meier estimate.
inline double aalen_johansen(const mrcr::Dataset& data, int cause, double t) {
    std::vector<double> times = data.times();
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    double surv = 1.0, cif = 0.0;
    for (double u : times) {
        if (u > t) break;
        double at_risk = 0, d = 0, dk = 0;
        for (const auto& r : data.records()) {
            if (r.time >= u) at_risk += 1;
            if (r.time == u && r.status > 0) {
                d += 1;
                if (r.status == cause) dk += 1;
            }
        }
        cif += surv * dk / at_risk;
        surv *= 1.0 - d / at_risk;
    }
    return cif;
}

// Equality-constrained maximisation of sum log w subject to sum w = 1 and
// G' w = 0, by infeasible-start Newton on the KKT system of the primal.
// Works directly on the weights; shares nothing with the dual solver. The KKT
// matrix is nonsingular when [1, G] has full column rank.
inline Eigen::VectorXd el_primal_oracle(const Eigen::MatrixXd& g) {
    const auto n = g.rows();
    const auto m = g.cols() + 1;
    Eigen::MatrixXd a(m, n);
    a.row(0).setOnes();
    a.bottomRows(m - 1) = g.transpose();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    b[0] = 1.0;

    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(m);
    auto residual = [&](const Eigen::VectorXd& w_, const Eigen::VectorXd& nu_) {
        Eigen::VectorXd r(n + m);
        r.head(n) = -w_.cwiseInverse() + a.transpose() * nu_;
        r.tail(m) = a * w_ - b;
        return r;
    };
    for (int it = 0; it < 200; ++it) {
        const Eigen::VectorXd r = residual(w, nu);
        if (r.lpNorm<Eigen::Infinity>() < 1e-15) break;
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
        kkt.topLeftCorner(n, n) = w.array().square().inverse().matrix().asDiagonal();
        kkt.topRightCorner(n, m) = a.transpose();
        kkt.bottomLeftCorner(m, n) = a;
        const Eigen::VectorXd step = kkt.partialPivLu().solve(-r);
        double s = 1.0;
        while ((w + s * step.head(n)).minCoeff() <= 0.0) s *= 0.5;
        const double r0 = r.norm();
        while (residual(w + s * step.head(n), nu + s * step.tail(m)).norm() > (1.0 - 0.01 * s) * r0 && s > 1e-12)
            s *= 0.5;
        w += s * step.head(n);
        nu += s * step.tail(m);
        if (s * step.head(n).lpNorm<Eigen::Infinity>() < 1e-17) break;
    }
    return w;
}

// Probabilists' Gauss-Hermite rule (weights sum to 1) by Golub-Welsch.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite(int m) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(m, m);
    for (int k = 1; k < m; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    return {eig.eigenvalues(), eig.eigenvectors().row(0).transpose().array().square().matrix()};
}

// E f(X) for X ~ N(0, I_p) by a tensor Gauss-Hermite rule.
template <class F>
double normal_expectation(std::size_t p, int nodes, F&& f) {
    const auto [x, w] = gauss_hermite(nodes);
    std::vector<int> idx(p, 0);
    std::vector<double> point(p);
    double total = 0.0;
    for (;;) {
        double weight = 1.0;
        for (std::size_t j = 0; j < p; ++j) {
            weight *= w[idx[j]];
            point[j] = x[idx[j]];
        }
        total += weight * f(point);
        std::size_t j = 0;
        while (j < p && ++idx[j] == nodes) idx[j++] = 0;
        if (j == p) break;
    }
    return total;
}

// Cause-specific hazard multipliers h_k = a_k exp(xi_k'(1, x) + lambda_k a).
inline std::vector<double> hazard_scales(const mrcr::ScenarioConfig& sc, const std::vector<double>& x, int a) {
    std::vector<double> h;
    for (std::size_t k = 0; k < static_cast<std::size_t>(sc.num_causes); ++k) {
        const auto& xi = sc.covariate_effects[k];
        double eta = xi[0] + sc.treatment_effects[k] * a;
        for (std::size_t j = 0; j < x.size(); ++j) eta += xi[j + 1] * x[j];
        h.push_back(sc.baseline_hazards[k] * std::exp(eta));
    }
    return h;
}

inline double common_time_effect(const mrcr::ScenarioConfig& sc) {
    const double rho = sc.time_effects.front();
    for (double r : sc.time_effects)
        if (r != rho) throw std::invalid_argument("quadrature needs a common time effect");
    return rho;
}

// Counterfactual CIF difference by quadrature. With a common time effect rho the
// cause-k incidence given (x, a) is (h_k / H) (1 - exp(-H (e^{rho t} - 1) / rho)),
// H = sum_k h_k. Covariates are standard normal.
inline double quadrature_delta(const mrcr::ScenarioConfig& sc, int cause, double t, int nodes = 24) {
    const double rho = common_time_effect(sc);
    const double v = std::expm1(rho * t) / rho;
    return normal_expectation(sc.p, nodes, [&](const std::vector<double>& x) {
        double arm[2];
        for (int a = 0; a < 2; ++a) {
            const auto h = hazard_scales(sc, x, a);
            double total = 0.0;
            for (double hk : h) total += hk;
            arm[a] = h[static_cast<std::size_t>(cause - 1)] / total * -std::expm1(-total * v);
        }
        return arm[1] - arm[0];
    });
}

// Marginal all-cause survival P(T > t) of the generator without censoring,
// averaging over the logistic treatment assignment.
inline double quadrature_survival(const mrcr::ScenarioConfig& sc, double t, int nodes = 24) {
    const double rho = common_time_effect(sc);
    const double v = std::expm1(rho * t) / rho;
    return normal_expectation(sc.p, nodes, [&](const std::vector<double>& x) {
        double lp = sc.ps_coefficients[0];
        for (std::size_t j = 0; j < x.size(); ++j) lp += sc.ps_coefficients[j + 1] * x[j];
        const double pi = 1.0 / (1.0 + std::exp(-lp));
        double s[2];
        for (int a = 0; a < 2; ++a) {
            double total = 0.0;
            for (double hk : hazard_scales(sc, x, a)) total += hk;
            s[a] = std::exp(-total * v);
        }
        return pi * s[1] + (1.0 - pi) * s[0];
    });
}

inline mrcr::PSModelFit fit_ps(const mrcr::Dataset& d, const std::vector<std::string>& terms) {
    const auto spec = mrcr::FeatureMapSpec::from_strings(terms);
    return mrcr::fit_logistic_ps(mrcr::build_feature_matrix(spec, d), d.treatment_vector(), spec);
}

inline mrcr::ORModelFit fit_or(const mrcr::Dataset& d, const mrcr::PseudoValueMatrix& pv,
                               const std::vector<std::string>& terms) {
    const auto spec = mrcr::FeatureMapSpec::from_strings(terms, true);
    return mrcr::fit_gee_or(pv, mrcr::build_covariate_matrix(spec, d), d.treatment_vector(), spec);
}

inline double arm_mean_contrast(const mrcr::PseudoValueMatrix& pv, const Eigen::VectorXd& a, Eigen::Index j) {
    double n1 = 0, n0 = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) (a[i] == 1.0 ? n1 : n0) += 1;
    double value = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a[i] == 1.0) value += (1.0 / n1) * pv.values(i, j);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a[i] == 0.0) value -= (1.0 / n0) * pv.values(i, j);
    return value;
}

// Feasible calibration instance with n in [10, 200] and S in [1, 4]. Rows are
// centred at a positively weighted mean, so zero is interior to their hull.
inline Eigen::MatrixXd random_calibration_instance(mrcr::Rng& rng) {
    const auto n = static_cast<Eigen::Index>(10 + rng.index(191));
    const auto s = static_cast<Eigen::Index>(1 + rng.index(4));
    Eigen::MatrixXd g(n, s);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index c = 0; c < s; ++c) g(i, c) = rng.normal() + (c == 0 ? 0.8 * rng.uniform() : 0.0);
    Eigen::VectorXd p(n);
    for (Eigen::Index i = 0; i < n; ++i) p[i] = 0.2 + rng.uniform();
    p /= p.sum();
    const Eigen::RowVectorXd centre = p.transpose() * g;
    g.rowwise() -= centre;
    return g;
}

}  // namespace support
