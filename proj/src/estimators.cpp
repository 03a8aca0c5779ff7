#include "mrcr/estimators.hpp"

#include <cmath>

#include "mrcr/errors.hpp"

namespace mrcr {

namespace {

void check_index(const PseudoValueMatrix& pv, std::size_t time_index) {
    if (time_index >= static_cast<std::size_t>(pv.cols())) throw InputError("time index outside pseudo-value grid");
}

void check_arms(const Eigen::VectorXd& treatment) {
    const double n1 = treatment.sum();
    if (n1 < 1) throw InputError("treated arm is empty");
    if (n1 > static_cast<double>(treatment.size()) - 1) throw InputError("control arm is empty");
}

std::vector<std::size_t> arm_rows(Arm arm, const Eigen::VectorXd& treatment) {
    const double want = arm == Arm::treated ? 1.0 : 0.0;
    std::vector<std::size_t> rows;
    for (Eigen::Index i = 0; i < treatment.size(); ++i)
        if (treatment[i] == want) rows.push_back(static_cast<std::size_t>(i));
    return rows;
}

EffectEstimate make(Method m, const PseudoValueMatrix& pv, std::size_t time_index, double value) {
    EffectEstimate e;
    e.method = m;
    e.cause = pv.cause;
    e.eval_time = pv.time_grid.at(time_index);
    e.value = value;
    return e;
}

}  // namespace

const char* to_string(Method m) {
    switch (m) {
        case Method::naive: return "naive";
        case Method::ipw: return "ipw";
        case Method::outcome_regression: return "or";
        case Method::multiply_robust: return "mr";
    }
    return "";
}

CalibrationInputs calibration_inputs(const CandidateModelSet& models, const Dataset& data, std::size_t time_index) {
    CalibrationInputs in;
    for (const auto& ps : models.ps_models) {
        if (static_cast<std::size_t>(ps.fitted_probabilities.size()) != data.size())
            throw InputError("propensity model was fitted on a different dataset");
        in.propensities.push_back(ps.fitted_probabilities);
    }
    for (const auto& fit : models.or_models) {
        const Eigen::MatrixXd design = build_covariate_matrix(fit.spec, data);
        in.outcome_treated.push_back(predict_or_all(fit, design, 1, time_index));
        in.outcome_control.push_back(predict_or_all(fit, design, 0, time_index));
    }
    return in;
}

Eigen::MatrixXd calibration_constraints(Arm arm, const CalibrationInputs& inputs, const Eigen::VectorXd& treatment) {
    const auto rows = arm_rows(arm, treatment);
    const auto L = inputs.propensities.size();
    const auto M = inputs.outcome_treated.size();
    Eigen::MatrixXd g(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(L + M));
    auto fill = [&](Eigen::Index col, const Eigen::VectorXd& values) {
        if (values.size() != treatment.size()) throw InputError("calibration input length mismatch");
        const double centre = values.mean();
        for (std::size_t r = 0; r < rows.size(); ++r)
            g(static_cast<Eigen::Index>(r), col) = values[static_cast<Eigen::Index>(rows[r])] - centre;
    };
    for (std::size_t l = 0; l < L; ++l) {
        const auto& p = inputs.propensities[l];
        fill(static_cast<Eigen::Index>(l), arm == Arm::treated ? Eigen::VectorXd(p) : Eigen::VectorXd(1.0 - p.array()));
    }
    for (std::size_t m = 0; m < M; ++m)
        fill(static_cast<Eigen::Index>(L + m),
             arm == Arm::treated ? inputs.outcome_treated[m] : inputs.outcome_control[m]);
    return g;
}

EffectEstimate naive_estimate(const PseudoValueMatrix& pv, const Eigen::VectorXd& treatment, std::size_t time_index) {
    check_index(pv, time_index);
    check_arms(treatment);
    const auto y = pv.values.col(static_cast<Eigen::Index>(time_index));
    double sum = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) sum += treatment[i] * y[i] - (1.0 - treatment[i]) * y[i];
    return make(Method::naive, pv, time_index, sum / static_cast<double>(y.size()));
}

EffectEstimate ipw_estimate(const PseudoValueMatrix& pv, const PSModelFit& ps, const Eigen::VectorXd& treatment,
                            std::size_t time_index) {
    check_index(pv, time_index);
    check_arms(treatment);
    const auto& pi = ps.fitted_probabilities;
    if (pi.size() != pv.rows()) throw InputError("propensity scores do not match the pseudo-value rows");
    const auto y = pv.values.col(static_cast<Eigen::Index>(time_index));
    double sum = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (!(pi[i] > 0.0 && pi[i] < 1.0))
            throw PositivityError("propensity score " + format_double(pi[i]) + " of subject " +
                                  std::to_string(i + 1) + " is outside (0,1)");
        sum += treatment[i] * y[i] / pi[i] - (1.0 - treatment[i]) * y[i] / (1.0 - pi[i]);
    }
    return make(Method::ipw, pv, time_index, sum / static_cast<double>(y.size()));
}

EffectEstimate or_estimate(const ORModelFit& fit, const Dataset& data, std::size_t time_index) {
    if (time_index >= fit.time_grid.size()) throw InputError("time index outside outcome-model grid");
    const Eigen::MatrixXd design = build_covariate_matrix(fit.spec, data);
    const Eigen::VectorXd treated = predict_or_all(fit, design, 1, time_index);
    const Eigen::VectorXd control = predict_or_all(fit, design, 0, time_index);
    EffectEstimate e;
    e.method = Method::outcome_regression;
    e.eval_time = fit.time_grid[time_index];
    e.value = (treated - control).mean();
    return e;
}

MRWeightSolution mr_weights(Arm arm, const CalibrationInputs& inputs, const Eigen::VectorXd& treatment,
                            const CalibrationOptions& options) {
    auto rows = arm_rows(arm, treatment);
    if (rows.empty()) throw InputError(std::string(to_string(arm)) + " arm is empty");
    const auto g = calibration_constraints(arm, inputs, treatment);
    MRWeightSolution sol;
    try {
        sol = solve_calibration_weights(g, options);
    } catch (const InfeasibleError& e) {
        const auto L = static_cast<int>(inputs.propensities.size());
        const int c = e.constraint();
        const std::string model = c < L ? "propensity model " + std::to_string(c + 1)
                                        : "outcome model " + std::to_string(c - L + 1);
        throw InfeasibleError(std::string(to_string(arm)) + " arm, " + model + ": " + e.what(), c);
    }
    sol.arm = arm;
    sol.subjects = std::move(rows);
    return sol;
}

MRWeightSolution mr_weights(Arm arm, const CandidateModelSet& models, const Dataset& data, std::size_t time_index,
                            const CalibrationOptions& options) {
    return mr_weights(arm, calibration_inputs(models, data, time_index), data.treatment_vector(), options);
}

EffectEstimate mr_estimate(const PseudoValueMatrix& pv, const CalibrationInputs& inputs,
                           const Eigen::VectorXd& treatment, std::size_t time_index,
                           const CalibrationOptions& options) {
    check_index(pv, time_index);
    check_arms(treatment);
    auto treated = mr_weights(Arm::treated, inputs, treatment, options);
    auto control = mr_weights(Arm::control, inputs, treatment, options);
    const auto y = pv.values.col(static_cast<Eigen::Index>(time_index));
    double value = 0.0;
    for (std::size_t k = 0; k < treated.subjects.size(); ++k)
        value += treated.weights[static_cast<Eigen::Index>(k)] * y[static_cast<Eigen::Index>(treated.subjects[k])];
    for (std::size_t k = 0; k < control.subjects.size(); ++k)
        value -= control.weights[static_cast<Eigen::Index>(k)] * y[static_cast<Eigen::Index>(control.subjects[k])];
    auto e = make(Method::multiply_robust, pv, time_index, value);
    for (const auto* sol : {&treated, &control})
        for (const auto& w : sol->warnings) e.notes.push_back(std::string(to_string(sol->arm)) + ": " + w);
    e.weights.push_back(std::move(treated));
    e.weights.push_back(std::move(control));
    return e;
}

EffectEstimate mr_estimate(const PseudoValueMatrix& pv, const CandidateModelSet& models, const Dataset& data,
                           std::size_t time_index, const CalibrationOptions& options) {
    for (const auto& fit : models.or_models)
        if (fit.time_grid != pv.time_grid) throw InputError("outcome model grid differs from the pseudo-value grid");
    return mr_estimate(pv, calibration_inputs(models, data, time_index), data.treatment_vector(), time_index,
                       options);
}

}  // namespace mrcr
