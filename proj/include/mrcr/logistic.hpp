#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mrcr/features.hpp"

namespace mrcr {

struct PSModelFit {
    FeatureMapSpec spec;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd fitted_probabilities;
    int iterations = 0;
    double score_norm = 0.0;             // max-norm of the log-likelihood gradient at the solution
    std::vector<double> loglik_trace;    // one entry per accepted iterate, starting at zero coefficients
};

struct LogisticOptions {
    double tolerance = 1e-8;
    int max_iterations = 100;
};

// Maximum-likelihood logistic regression by Newton-Raphson / IRLS with step halving.
// Throws CollinearityError for rank-deficient designs and ConvergenceError on
// separation or non-convergence.
PSModelFit fit_logistic_ps(const Eigen::MatrixXd& design, const Eigen::VectorXd& treatment,
                           const FeatureMapSpec& spec = {}, const LogisticOptions& options = {});

Eigen::VectorXd logistic_score(const Eigen::MatrixXd& design, const Eigen::VectorXd& treatment,
                               const Eigen::VectorXd& coefficients);
double logistic_loglik(const Eigen::MatrixXd& design, const Eigen::VectorXd& treatment,
                       const Eigen::VectorXd& coefficients);

// Lists column indices that are linearly dependent on earlier-pivoted columns;
// empty when the matrix has full column rank.
std::vector<int> dependent_columns(const Eigen::MatrixXd& design, double threshold = 1e-10);

}  // namespace mrcr
