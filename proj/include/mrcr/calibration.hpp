#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mrcr {

enum class Arm { treated, control };

inline const char* to_string(Arm arm) { return arm == Arm::treated ? "treated" : "control"; }

// Empirical-likelihood calibration weights for one treatment arm.
struct MRWeightSolution {
    Arm arm = Arm::treated;
    std::vector<std::size_t> subjects;  // dataset rows in this arm, ascending
    Eigen::VectorXd weights;
    Eigen::VectorXd multipliers;        // one per constraint; zero where a column was dropped
    double constraint_residual = 0.0;   // max |sum_i w_i g_i| over all constraints
    int iterations = 0;
    std::vector<int> dropped;           // collinear constraint columns
    std::vector<std::string> warnings;
    std::vector<double> dual_trace;     // -mean log(1 + rho'g) at each accepted iterate, by accumulated changes
};

// Constraint columns whose entries are all below this in magnitude are dropped.
inline constexpr double kNegligibleConstraint = 1e-12;

struct CalibrationOptions {
    double tolerance = 1e-10;        // max-norm of the dual gradient
    int max_iterations = 200;
    double positivity_floor = 1e-10; // 1 + rho'g must stay above this
    double collinearity = 1e-10;     // relative pivot threshold for dropping columns
    double divergence_level = -30.0; // dual objective below this means the dual is unbounded
};

// Maximises sum_i log w_i subject to sum_i w_i = 1 and sum_i w_i g_i = 0, where
// row i of `constraints` is g_i. Solved through the dual by damped Newton-Raphson
// starting at rho = 0.
// Throws InfeasibleError when zero lies outside the convex hull of the rows and
// ConvergenceError when the iteration limit is reached.
MRWeightSolution solve_calibration_weights(const Eigen::MatrixXd& constraints, const CalibrationOptions& options = {});

}  // namespace mrcr
