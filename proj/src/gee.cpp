#include "mrcr/gee.hpp"

#include <cmath>
#include <sstream>

#include "mrcr/errors.hpp"
#include "mrcr/logistic.hpp"

namespace mrcr {

namespace {

double link_fn(double mu) { return std::log(-std::log1p(-mu)); }

// mean, d(mean)/d(eta) and d2(mean)/d(eta)2, unclamped
void cloglog_mean(double eta, double& mu, double& dmu, double& d2mu) {
    const double e = std::exp(eta);
    const double survival = std::exp(-e);
    mu = e < 1e-2 ? -std::expm1(-e) : 1.0 - survival;
    dmu = e * survival;
    d2mu = dmu * (1.0 - e);
}

struct Layout {
    Eigen::Index h, r, q;
    bool treat;
    Eigen::Index size() const { return h + r; }
};

// Rows of the shared part: (A_i if modelled, x_i).
Eigen::MatrixXd shared_design(const Eigen::MatrixXd& design, const Eigen::VectorXd& treatment, bool treat) {
    if (!treat) return design;
    Eigen::MatrixXd z(design.rows(), design.cols() + 1);
    z.col(0) = treatment;
    z.rightCols(design.cols()) = design;
    return z;
}

struct Evaluation {
    Eigen::VectorXd score;
    Eigen::MatrixXd info_weights;  // per-cell D D' weights; Fisher scoring matrix assembled on demand
    Eigen::MatrixXd hessian;  // -dU/dphi, adds the residual curvature term
    double sse = 0.0;
};

// Fills the block-structured matrix from per-cell weights w(i, j).
Eigen::MatrixXd assemble(const Layout& lay, const Eigen::MatrixXd& w, const Eigen::MatrixXd& z) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(lay.size(), lay.size());
    for (Eigen::Index j = 0; j < lay.h; ++j) {
        m(j, j) = w.col(j).sum();
        if (lay.r > 0) {
            const Eigen::VectorXd cross = z.transpose() * w.col(j);
            m.block(j, lay.h, 1, lay.r) = cross.transpose();
            m.block(lay.h, j, lay.r, 1) = cross;
        }
    }
    if (lay.r > 0) {
        const Eigen::VectorXd row = w.rowwise().sum();
        m.bottomRightCorner(lay.r, lay.r) = z.transpose() * row.asDiagonal() * z;
    }
    return m;
}

Evaluation evaluate(const Eigen::VectorXd& phi, const Layout& lay, const Eigen::MatrixXd& y, const Eigen::MatrixXd& z,
                    bool with_info) {
    const auto n = y.rows();
    const Eigen::VectorXd lin = lay.r > 0 ? Eigen::VectorXd(z * phi.tail(lay.r)) : Eigen::VectorXd::Zero(n);
    Evaluation ev;
    ev.score = Eigen::VectorXd::Zero(lay.size());
    Eigen::VectorXd row_score = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd w_info, w_hess;
    if (with_info) {
        w_info.resize(n, lay.h);
        w_hess.resize(n, lay.h);
    }
    for (Eigen::Index j = 0; j < lay.h; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double mu, dmu, d2mu;
            cloglog_mean(phi[j] + lin[i], mu, dmu, d2mu);
            const double resid = y(i, j) - mu;
            ev.sse += resid * resid;
            ev.score[j] += dmu * resid;
            row_score[i] += dmu * resid;
            if (with_info) {
                w_info(i, j) = dmu * dmu;
                w_hess(i, j) = dmu * dmu - resid * d2mu;
            }
        }
    }
    if (lay.r > 0) ev.score.tail(lay.r) = z.transpose() * row_score;
    if (with_info) {
        ev.info_weights = std::move(w_info);
        ev.hessian = assemble(lay, w_hess, z);
    }
    return ev;
}

Layout layout_for(const PseudoValueMatrix& pv, const Eigen::MatrixXd& design, bool treat) {
    Layout lay;
    lay.h = pv.cols();
    lay.q = design.cols();
    lay.treat = treat;
    lay.r = lay.q + (treat ? 1 : 0);
    return lay;
}

}  // namespace

double inverse_link(Link link, double eta) {
    switch (link) {
        case Link::cloglog: {
            const double mu = -std::expm1(-std::exp(eta));
            return std::clamp(mu, kMeanFloor, 1.0 - kMeanFloor);
        }
    }
    return 0.0;
}

Eigen::VectorXd ORModelFit::parameters() const {
    const bool treat = spec.includes_treatment;
    Eigen::VectorXd phi(time_intercepts.size() + (treat ? 1 : 0) + covariate_coefs.size());
    phi.head(time_intercepts.size()) = time_intercepts;
    if (treat) phi[time_intercepts.size()] = treatment_coef;
    phi.tail(covariate_coefs.size()) = covariate_coefs;
    return phi;
}

ORModelFit fit_gee_or(const PseudoValueMatrix& pv, const Eigen::MatrixXd& design, const Eigen::VectorXd& treatment,
                      const FeatureMapSpec& spec, Link link, const GeeOptions& options) {
    const auto n = pv.rows();
    if (pv.cols() < 1) throw InputError("GEE fit: empty time grid");
    if (design.rows() != n || treatment.size() != n) throw InputError("GEE fit: dimension mismatch");
    const auto lay = layout_for(pv, design, spec.includes_treatment);
    const Eigen::MatrixXd z = shared_design(design, treatment, lay.treat);

    {
        Eigen::MatrixXd full(n, 1 + lay.r);
        full.col(0).setOnes();
        if (lay.r > 0) full.rightCols(lay.r) = z;
        if (auto dep = dependent_columns(full); !dep.empty()) {
            std::ostringstream os;
            os << "outcome design is rank deficient; dependent columns:";
            for (int c : dep) os << ' ' << c;
            throw CollinearityError(os.str());
        }
    }

    Eigen::VectorXd phi = Eigen::VectorXd::Zero(lay.size());
    for (Eigen::Index j = 0; j < lay.h; ++j) {
        const double m = std::clamp(pv.values.col(j).mean(), 0.01, 0.99);
        phi[j] = link_fn(m);
    }

    Evaluation ev = evaluate(phi, lay, pv.values, z, true);
    int iter = 0;
    bool converged = false;
    for (; iter <= options.max_iterations; ++iter) {
        if (ev.score.lpNorm<Eigen::Infinity>() < options.tolerance) {
            converged = true;
            break;
        }
        if (iter == options.max_iterations) break;
        // Newton step when the full Hessian is positive definite, Fisher scoring otherwise.
        Eigen::VectorXd step;
        if (const Eigen::LLT<Eigen::MatrixXd> llt(ev.hessian); llt.info() == Eigen::Success) {
            step = llt.solve(ev.score);
        } else {
            const Eigen::LDLT<Eigen::MatrixXd> ldlt(assemble(lay, ev.info_weights, z));
            if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14)
                throw CollinearityError("GEE fit: singular scoring matrix");
            step = ldlt.solve(ev.score);
        }
        double scale = 1.0;
        Evaluation next = evaluate(phi + step, lay, pv.values, z, true);
        const double slack = 1e-12 * (1.0 + ev.sse);
        bool halved = false;
        for (int halvings = 0; !(next.sse <= ev.sse + slack) && halvings < 40; ++halvings) {
            scale *= 0.5;
            halved = true;
            next = evaluate(phi + scale * step, lay, pv.values, z, false);
        }
        if (!(next.sse <= ev.sse + slack)) break;
        phi += scale * step;
        ev = halved ? evaluate(phi, lay, pv.values, z, true) : std::move(next);
    }
    if (!converged) {
        std::ostringstream os;
        os << "GEE fit did not converge: iterations=" << iter
           << " residual=" << ev.score.lpNorm<Eigen::Infinity>() << " sse=" << ev.sse;
        throw ConvergenceError(os.str());
    }

    ORModelFit fit;
    fit.spec = spec;
    fit.link = link;
    fit.time_grid = pv.time_grid;
    fit.time_intercepts = phi.head(lay.h);
    fit.treatment_coef = lay.treat ? phi[lay.h] : 0.0;
    fit.covariate_coefs = phi.tail(lay.q);
    fit.iterations = iter;
    fit.residual = ev.score.lpNorm<Eigen::Infinity>();
    return fit;
}

Eigen::VectorXd gee_estimating_equation(const ORModelFit& fit, const PseudoValueMatrix& pv,
                                        const Eigen::MatrixXd& design, const Eigen::VectorXd& treatment) {
    const auto lay = layout_for(pv, design, fit.spec.includes_treatment);
    const Eigen::MatrixXd z = shared_design(design, treatment, lay.treat);
    return evaluate(fit.parameters(), lay, pv.values, z, false).score;
}

double predict_or(const ORModelFit& fit, const Eigen::Ref<const Eigen::VectorXd>& covariates, int treatment_value,
                  std::size_t time_index) {
    if (time_index >= static_cast<std::size_t>(fit.time_intercepts.size()))
        throw InputError("predict_or: time index outside grid");
    if (covariates.size() != fit.covariate_coefs.size()) throw InputError("predict_or: covariate length mismatch");
    const double eta = fit.time_intercepts[static_cast<Eigen::Index>(time_index)] +
                       fit.treatment_coef * treatment_value + fit.covariate_coefs.dot(covariates);
    return inverse_link(fit.link, eta);
}

Eigen::VectorXd predict_or_all(const ORModelFit& fit, const Eigen::MatrixXd& design, int treatment_value,
                               std::size_t time_index) {
    if (time_index >= static_cast<std::size_t>(fit.time_intercepts.size()))
        throw InputError("predict_or: time index outside grid");
    if (design.cols() != fit.covariate_coefs.size()) throw InputError("predict_or: covariate length mismatch");
    const double offset =
        fit.time_intercepts[static_cast<Eigen::Index>(time_index)] + fit.treatment_coef * treatment_value;
    Eigen::VectorXd eta = design * fit.covariate_coefs;
    for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = inverse_link(fit.link, eta[i] + offset);
    return eta;
}

}  // namespace mrcr
