#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrcr/calibration.hpp"
#include "mrcr/dataset.hpp"
#include "mrcr/gee.hpp"
#include "mrcr/logistic.hpp"
#include "mrcr/survival.hpp"

namespace mrcr {

enum class Method { naive, ipw, outcome_regression, multiply_robust };

const char* to_string(Method m);

struct EffectEstimate {
    Method method = Method::naive;
    int cause = 1;
    double eval_time = 0.0;
    double value = 0.0;
    std::vector<MRWeightSolution> weights;  // multiply-robust only: treated then control
    std::vector<std::string> notes;
};

// Candidate propensity and outcome models, all fitted on the same dataset.
struct CandidateModelSet {
    std::vector<PSModelFit> ps_models;
    std::vector<ORModelFit> or_models;

    std::size_t size() const { return ps_models.size() + or_models.size(); }
};

// Model predictions entering the calibration constraints at one time point:
// propensities p^l(X_i) and outcome predictions at A = 1 and A = 0.
struct CalibrationInputs {
    std::vector<Eigen::VectorXd> propensities;
    std::vector<Eigen::VectorXd> outcome_treated;
    std::vector<Eigen::VectorXd> outcome_control;
};

CalibrationInputs calibration_inputs(const CandidateModelSet& models, const Dataset& data, std::size_t time_index);

// Stacked constraint matrix for one arm (rows = arm subjects in dataset order).
// Propensity columns first, then outcome columns, each centred at its full-sample mean.
Eigen::MatrixXd calibration_constraints(Arm arm, const CalibrationInputs& inputs, const Eigen::VectorXd& treatment);

EffectEstimate naive_estimate(const PseudoValueMatrix& pv, const Eigen::VectorXd& treatment, std::size_t time_index);

EffectEstimate ipw_estimate(const PseudoValueMatrix& pv, const PSModelFit& ps, const Eigen::VectorXd& treatment,
                            std::size_t time_index);

EffectEstimate or_estimate(const ORModelFit& fit, const Dataset& data, std::size_t time_index);

MRWeightSolution mr_weights(Arm arm, const CandidateModelSet& models, const Dataset& data, std::size_t time_index,
                            const CalibrationOptions& options = {});
MRWeightSolution mr_weights(Arm arm, const CalibrationInputs& inputs, const Eigen::VectorXd& treatment,
                            const CalibrationOptions& options = {});

EffectEstimate mr_estimate(const PseudoValueMatrix& pv, const CandidateModelSet& models, const Dataset& data,
                           std::size_t time_index, const CalibrationOptions& options = {});
EffectEstimate mr_estimate(const PseudoValueMatrix& pv, const CalibrationInputs& inputs,
                           const Eigen::VectorXd& treatment, std::size_t time_index,
                           const CalibrationOptions& options = {});

}  // namespace mrcr
