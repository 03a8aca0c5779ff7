#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mrcr/bootstrap.hpp"
#include "mrcr/calibration.hpp"
#include "mrcr/dataset.hpp"
#include "mrcr/estimators.hpp"
#include "mrcr/features.hpp"
#include "mrcr/survival.hpp"

namespace mrcr {

enum class ModelRole { propensity, outcome };

// A named candidate model. Names are p<k> for propensity models and q<k> for
// outcome models, matching estimator labels such as "MRp1q2".
struct ModelSpec {
    std::string name;
    ModelRole role = ModelRole::propensity;
    FeatureMapSpec features;

    static ModelSpec make(const std::string& name, const std::vector<std::string>& terms);
};

// "naive", a single model name ("p1" = IPW, "q1" = outcome regression), or
// "MR" followed by model names ("MRp1p2q1").
struct EstimatorLabel {
    std::string text;
    Method method = Method::naive;
    std::vector<std::string> models;

    static EstimatorLabel parse(const std::string& text);
};

// The standard menu for a model set: each single model, each model alone under
// MR, then every MR combination of two or more models in listing order.
std::vector<EstimatorLabel> table_labels(const std::vector<ModelSpec>& models);

struct PipelineConfig {
    int cause = 1;
    std::vector<double> eval_times;
    std::vector<double> time_grid;  // outcome-model grid; default percentile grid when empty
    std::vector<ModelSpec> models;
    std::vector<EstimatorLabel> estimators;
    CalibrationOptions calibration;

    const ModelSpec& model(const std::string& name) const;
    // Throws InputError if a label references an unknown model or a role mismatch.
    void validate() const;
};

struct EstimateOutcome {
    std::string label;
    double eval_time = 0.0;
    std::optional<EffectEstimate> estimate;
    std::string error;

    double value() const;  // NaN on failure
};

struct PipelineResult {
    std::vector<double> grid;
    std::vector<std::size_t> eval_index;  // grid column of each eval time
    PseudoValueMatrix pseudovalues;
    std::vector<EstimateOutcome> outcomes;  // estimator-major, then eval time

    std::vector<double> values() const;
};

// Pseudo-values, candidate fits and every configured estimator on one dataset.
// Failures of individual models or estimators are recorded in the outcomes;
// failures shared by all estimators (pseudo-values, empty arms) throw.
PipelineResult run_pipeline(const Dataset& data, const PipelineConfig& config);

struct PipelineBootstrap {
    PipelineResult point;
    std::vector<BootstrapResult> intervals;  // aligned with point.outcomes
};

// Refits everything on every resample.
PipelineBootstrap bootstrap_pipeline(const Dataset& data, const PipelineConfig& config, int B, double alpha,
                                     std::uint64_t seed, unsigned threads = 1);

// Single estimator, single time point.
BootstrapResult bootstrap_cis(const Dataset& data, const PipelineConfig& estimator_config, int cause,
                              double eval_time, int B, double alpha, std::uint64_t seed, unsigned threads = 1);

}  // namespace mrcr
