#include "mrcr/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mrcr/errors.hpp"

namespace mrcr {

namespace {

struct DualState {
    double value = 0.0;
    Eigen::VectorXd gradient;
    bool admissible = false;
};

// Normalised dual f(rho) = -mean log(1 + rho'g_i) and its gradient.
DualState dual_at(const Eigen::MatrixXd& g, const Eigen::VectorXd& rho, double floor) {
    DualState s;
    const Eigen::VectorXd denom = (g * rho).array() + 1.0;
    if (denom.minCoeff() <= floor) return s;
    s.admissible = true;
    const double n = static_cast<double>(g.rows());
    s.value = -denom.array().log().sum() / n;
    s.gradient = -(g.transpose() * denom.cwiseInverse()) / n;
    return s;
}

// f(rho + delta) - f(rho) = -mean log1p(g_i'delta / (1 + g_i'rho)), free of the
// cancellation in differencing two evaluations of f.
double dual_change(const Eigen::MatrixXd& g, const Eigen::VectorXd& rho, const Eigen::VectorXd& delta) {
    const Eigen::ArrayXd ratio = (g * delta).array() / ((g * rho).array() + 1.0);
    return -ratio.log1p().sum() / static_cast<double>(g.rows());
}

}  // namespace

MRWeightSolution solve_calibration_weights(const Eigen::MatrixXd& constraints, const CalibrationOptions& options) {
    const auto n = constraints.rows();
    const auto S = constraints.cols();
    if (n == 0) throw InputError("calibration weights: arm is empty");
    if (!constraints.allFinite()) throw InputError("calibration weights: non-finite constraint values");

    MRWeightSolution sol;
    sol.multipliers = Eigen::VectorXd::Zero(S);
    sol.weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));

    // Columns that are negligible on this arm are trivially satisfied; one-signed
    // columns cannot be balanced by positive weights. Entries are differences of
    // probabilities, so rounding residue below kNegligibleConstraint is noise.
    const double scale = S > 0 ? constraints.cwiseAbs().maxCoeff() : 0.0;
    const double negligible = std::max(options.collinearity * scale, kNegligibleConstraint);
    std::vector<int> active;
    for (Eigen::Index c = 0; c < S; ++c) {
        const auto col = constraints.col(c);
        if (col.cwiseAbs().maxCoeff() <= negligible) {
            sol.dropped.push_back(static_cast<int>(c));
            continue;
        }
        if (col.maxCoeff() <= 0.0 || col.minCoeff() >= 0.0) {
            std::ostringstream os;
            os << "calibration constraint " << c << " is infeasible: the full-sample mean lies outside the range of"
               << " arm values [" << col.minCoeff() << ", " << col.maxCoeff() << "] after centring";
            throw InfeasibleError(os.str(), static_cast<int>(c));
        }
        active.push_back(static_cast<int>(c));
    }

    if (!active.empty()) {
        Eigen::MatrixXd sub(n, static_cast<Eigen::Index>(active.size()));
        for (std::size_t k = 0; k < active.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = constraints.col(active[k]);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
        qr.setThreshold(options.collinearity);
        const auto rank = qr.rank();
        std::vector<int> keep;
        for (Eigen::Index k = 0; k < sub.cols(); ++k) {
            const int col = active[static_cast<std::size_t>(qr.colsPermutation().indices()[k])];
            if (k < rank)
                keep.push_back(col);
            else
                sol.dropped.push_back(col);
        }
        std::sort(keep.begin(), keep.end());
        active = std::move(keep);
    }
    std::sort(sol.dropped.begin(), sol.dropped.end());
    for (int c : sol.dropped)
        sol.warnings.push_back("constraint " + std::to_string(c) + " is collinear on this arm and was dropped");

    const auto s = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd g(n, s);
    for (Eigen::Index k = 0; k < s; ++k) g.col(k) = constraints.col(active[static_cast<std::size_t>(k)]);

    Eigen::VectorXd rho = Eigen::VectorXd::Zero(s);
    DualState state = dual_at(g, rho, options.positivity_floor);
    sol.dual_trace.push_back(state.value);
    int iter = 0;
    bool converged = s == 0;
    while (!converged) {
        if (state.gradient.lpNorm<Eigen::Infinity>() < options.tolerance) {
            converged = true;
            break;
        }
        if (iter >= options.max_iterations) break;
        ++iter;

        const Eigen::VectorXd inv = ((g * rho).array() + 1.0).inverse().matrix();
        const Eigen::MatrixXd gw = inv.asDiagonal() * g;
        const Eigen::MatrixXd hess = gw.transpose() * gw / static_cast<double>(n);
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        if (ldlt.info() != Eigen::Success) throw ConvergenceError("calibration weights: singular dual Hessian");
        const Eigen::VectorXd step = -ldlt.solve(state.gradient);

        // Halve until admissible and the dual does not increase.
        double t = 1.0;
        DualState next;
        double change = 0.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
            next = dual_at(g, rho + t * step, options.positivity_floor);
            if (!next.admissible) continue;
            change = dual_change(g, rho, t * step);
            if (change <= 0.0) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        rho += t * step;
        // Trace entries accumulate the changes, so their order is exact.
        sol.dual_trace.push_back(sol.dual_trace.back() + change);
        state = std::move(next);

        if (state.value < options.divergence_level) {
            Eigen::Index worst = 0;
            (rho.cwiseAbs().cwiseProduct(g.cwiseAbs().colwise().maxCoeff().transpose())).maxCoeff(&worst);
            const int col = active[static_cast<std::size_t>(worst)];
            throw InfeasibleError("calibration constraint " + std::to_string(col) +
                                      " cannot be met: the dual is unbounded (full-sample mean outside the convex "
                                      "hull of arm values)",
                                  col);
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << "calibration weights did not converge after " << iter
           << " iterations; dual gradient norm " << state.gradient.lpNorm<Eigen::Infinity>();
        throw ConvergenceError(os.str());
    }

    if (s > 0) {
        const Eigen::VectorXd denom = (g * rho).array() + 1.0;
        sol.weights = denom.cwiseInverse() / static_cast<double>(n);
        sol.weights /= sol.weights.sum();
        for (Eigen::Index k = 0; k < s; ++k) sol.multipliers[active[static_cast<std::size_t>(k)]] = rho[k];
    }
    sol.iterations = iter;
    sol.constraint_residual = S > 0 ? (constraints.transpose() * sol.weights).lpNorm<Eigen::Infinity>() : 0.0;
    return sol;
}

}  // namespace mrcr
