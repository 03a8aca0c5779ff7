#include "mrcr/logistic.hpp"

#include <cmath>
#include <sstream>

#include "mrcr/errors.hpp"

namespace mrcr {

namespace {

double expit(double eta) {
    if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

// log(1 + exp(eta)) without overflow
double softplus(double eta) { return std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta))); }

std::string describe_columns(const std::vector<int>& cols, const FeatureMapSpec& spec) {
    std::ostringstream os;
    for (std::size_t k = 0; k < cols.size(); ++k) {
        if (k) os << ", ";
        const auto c = static_cast<std::size_t>(cols[k]);
        os << c;
        if (c < spec.terms.size()) os << " (" << spec.terms[c].to_string() << ")";
    }
    return os.str();
}

}  // namespace

std::vector<int> dependent_columns(const Eigen::MatrixXd& design, double threshold) {
    if (design.cols() == 0) return {};
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(threshold);
    const auto rank = qr.rank();
    std::vector<int> out;
    for (Eigen::Index k = rank; k < design.cols(); ++k) out.push_back(qr.colsPermutation().indices()[k]);
    std::sort(out.begin(), out.end());
    return out;
}

Eigen::VectorXd logistic_score(const Eigen::MatrixXd& design, const Eigen::VectorXd& treatment,
                               const Eigen::VectorXd& coefficients) {
    const Eigen::VectorXd eta = design * coefficients;
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = treatment[i] - expit(eta[i]);
    return design.transpose() * resid;
}

double logistic_loglik(const Eigen::MatrixXd& design, const Eigen::VectorXd& treatment,
                       const Eigen::VectorXd& coefficients) {
    const Eigen::VectorXd eta = design * coefficients;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += treatment[i] * eta[i] - softplus(eta[i]);
    return ll;
}

PSModelFit fit_logistic_ps(const Eigen::MatrixXd& design, const Eigen::VectorXd& treatment,
                           const FeatureMapSpec& spec, const LogisticOptions& options) {
    const auto n = design.rows();
    const auto d = design.cols();
    if (n == 0 || d == 0) throw InputError("logistic fit: empty design");
    if (treatment.size() != n) throw InputError("logistic fit: treatment length mismatch");
    double n1 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (treatment[i] != 0.0 && treatment[i] != 1.0) throw InputError("logistic fit: treatment must be binary");
        n1 += treatment[i];
    }
    if (n1 == 0 || n1 == static_cast<double>(n)) throw InputError("logistic fit: both treatment values required");
    if (auto dep = dependent_columns(design); !dep.empty())
        throw CollinearityError("propensity design is rank deficient; dependent columns: " +
                                describe_columns(dep, spec));

    PSModelFit fit;
    fit.spec = spec;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
    double ll = logistic_loglik(design, treatment, beta);
    fit.loglik_trace.push_back(ll);

    Eigen::VectorXd p(n), w(n);
    bool converged = false;
    double step_norm = 0.0, grad_norm = 0.0;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        const Eigen::VectorXd eta = design * beta;
        for (Eigen::Index i = 0; i < n; ++i) {
            p[i] = expit(eta[i]);
            w[i] = p[i] * (1.0 - p[i]);
        }
        const Eigen::VectorXd grad = design.transpose() * (treatment - p);
        const Eigen::MatrixXd info = design.transpose() * w.asDiagonal() * design;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        if (ldlt.info() != Eigen::Success) throw ConvergenceError("logistic fit: singular information matrix");
        Eigen::VectorXd step = ldlt.solve(grad);

        // Near the optimum the likelihood change drops below rounding; a step
        // within that noise is taken if it still shrinks the score.
        const double noise = 1e-12 * (1.0 + std::abs(ll));
        const double current_grad = grad.lpNorm<Eigen::Infinity>();
        auto acceptable = [&](const Eigen::VectorXd& cand, double ll_cand) {
            if (ll_cand >= ll) return true;
            return ll_cand >= ll - noise &&
                   logistic_score(design, treatment, cand).lpNorm<Eigen::Infinity>() < current_grad;
        };
        double scale = 1.0;
        Eigen::VectorXd candidate = beta + step;
        double ll_new = logistic_loglik(design, treatment, candidate);
        bool ok = acceptable(candidate, ll_new);
        for (int halvings = 0; !ok && halvings < 40; ++halvings) {
            scale *= 0.5;
            candidate = beta + scale * step;
            ll_new = logistic_loglik(design, treatment, candidate);
            ok = acceptable(candidate, ll_new);
        }
        if (!ok) {
            candidate = beta;
            ll_new = ll;
        }
        step_norm = (candidate - beta).lpNorm<Eigen::Infinity>();
        beta = candidate;
        ll = ll_new;
        fit.loglik_trace.push_back(ll);
        grad_norm = logistic_score(design, treatment, beta).lpNorm<Eigen::Infinity>();
        if (step_norm < options.tolerance && grad_norm < options.tolerance) {
            converged = true;
            ++iter;
            break;
        }
    }

    const Eigen::VectorXd eta = design * beta;
    const double max_eta = eta.cwiseAbs().maxCoeff();
    if (!converged || max_eta > 30.0) {
        std::ostringstream os;
        os << "logistic fit did not converge (possible separation): iterations=" << iter
           << " loglik=" << ll << " gradient=" << grad_norm << " last step=" << step_norm
           << " max|eta|=" << max_eta;
        throw ConvergenceError(os.str());
    }

    fit.coefficients = beta;
    fit.fitted_probabilities.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) fit.fitted_probabilities[i] = expit(eta[i]);
    fit.iterations = iter;
    fit.score_norm = grad_norm;
    return fit;
}

}  // namespace mrcr
