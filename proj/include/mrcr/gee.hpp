#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mrcr/features.hpp"
#include "mrcr/survival.hpp"

namespace mrcr {

enum class Link { cloglog };

// Predictions are clamped to [kMeanFloor, 1 - kMeanFloor].
inline constexpr double kMeanFloor = 1e-12;

double inverse_link(Link link, double eta);

// Pseudo-value regression g(F(t_j | A, X)) = alpha_j + gamma A + beta' X with
// time-specific intercepts and shared slopes.
struct ORModelFit {
    FeatureMapSpec spec;
    Eigen::VectorXd time_intercepts;
    double treatment_coef = 0.0;
    Eigen::VectorXd covariate_coefs;
    Link link = Link::cloglog;
    std::vector<double> time_grid;
    int iterations = 0;
    double residual = 0.0;  // max-norm of the estimating equation at the solution

    // Parameter vector in the order (alphas, gamma if modelled, betas).
    Eigen::VectorXd parameters() const;
};

struct GeeOptions {
    double tolerance = 1e-6;
    int max_iterations = 200;
};

// Solves the working-independence estimating equation by Newton steps (Fisher
// scoring when the full Hessian is not positive definite) with step halving. `design` holds covariate columns only (no intercept, no treatment);
// the treatment coefficient is estimated when spec.includes_treatment is set.
ORModelFit fit_gee_or(const PseudoValueMatrix& pv, const Eigen::MatrixXd& design, const Eigen::VectorXd& treatment,
                      const FeatureMapSpec& spec, Link link = Link::cloglog, const GeeOptions& options = {});

// U(phi) evaluated at the fit's parameters.
Eigen::VectorXd gee_estimating_equation(const ORModelFit& fit, const PseudoValueMatrix& pv,
                                        const Eigen::MatrixXd& design, const Eigen::VectorXd& treatment);

double predict_or(const ORModelFit& fit, const Eigen::Ref<const Eigen::VectorXd>& covariates, int treatment_value,
                  std::size_t time_index);

// Predictions for every row of `design` at a fixed treatment value.
Eigen::VectorXd predict_or_all(const ORModelFit& fit, const Eigen::MatrixXd& design, int treatment_value,
                               std::size_t time_index);

}  // namespace mrcr
