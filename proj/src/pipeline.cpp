#include "mrcr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <regex>
#include <variant>

#include "mrcr/errors.hpp"
#include "mrcr/gee.hpp"
#include "mrcr/logistic.hpp"

namespace mrcr {

namespace {

const std::regex& model_name_re() {
    static const std::regex re(R"([pq][0-9]+)");
    return re;
}

}  // namespace

ModelSpec ModelSpec::make(const std::string& name, const std::vector<std::string>& terms) {
    if (!std::regex_match(name, model_name_re()))
        throw InputError("model name '" + name + "' must be p<k> (propensity) or q<k> (outcome)");
    ModelSpec m;
    m.name = name;
    m.role = name[0] == 'p' ? ModelRole::propensity : ModelRole::outcome;
    m.features = FeatureMapSpec::from_strings(terms, m.role == ModelRole::outcome);
    return m;
}

EstimatorLabel EstimatorLabel::parse(const std::string& text) {
    EstimatorLabel label;
    label.text = text;
    if (text == "naive") return label;
    if (std::regex_match(text, model_name_re())) {
        label.method = text[0] == 'p' ? Method::ipw : Method::outcome_regression;
        label.models = {text};
        return label;
    }
    static const std::regex mr_re(R"(MR((?:[pq][0-9]+)+))");
    std::smatch m;
    if (!std::regex_match(text, m, mr_re)) throw InputError("unrecognised estimator label '" + text + "'");
    label.method = Method::multiply_robust;
    const std::string rest = m[1];
    for (auto it = std::sregex_iterator(rest.begin(), rest.end(), model_name_re()); it != std::sregex_iterator(); ++it)
        label.models.push_back(it->str());
    return label;
}

std::vector<EstimatorLabel> table_labels(const std::vector<ModelSpec>& models) {
    std::vector<const ModelSpec*> ordered;
    for (const auto& m : models)
        if (m.role == ModelRole::propensity) ordered.push_back(&m);
    for (const auto& m : models)
        if (m.role == ModelRole::outcome) ordered.push_back(&m);

    std::vector<EstimatorLabel> out;
    for (const auto* m : ordered) out.push_back(EstimatorLabel::parse(m->name));
    for (const auto* m : ordered) out.push_back(EstimatorLabel::parse("MR" + m->name));
    const auto S = ordered.size();
    for (std::size_t size = 2; size <= S; ++size) {
        // combinations in lexicographic order of positions
        std::vector<std::size_t> pick(size);
        for (std::size_t k = 0; k < size; ++k) pick[k] = k;
        for (;;) {
            std::string text = "MR";
            for (auto k : pick) text += ordered[k]->name;
            out.push_back(EstimatorLabel::parse(text));
            std::size_t pos = size;
            while (pos > 0 && pick[pos - 1] == S - size + pos - 1) --pos;
            if (pos == 0) break;
            ++pick[pos - 1];
            for (std::size_t k = pos; k < size; ++k) pick[k] = pick[k - 1] + 1;
        }
    }
    return out;
}

const ModelSpec& PipelineConfig::model(const std::string& name) const {
    for (const auto& m : models)
        if (m.name == name) return m;
    throw InputError("estimator references undefined model '" + name + "'");
}

void PipelineConfig::validate() const {
    if (cause < 1) throw InputError("cause must be at least 1");
    if (eval_times.empty()) throw InputError("no evaluation times configured");
    for (double t : eval_times)
        if (!(t > 0.0) || !std::isfinite(t)) throw InputError("evaluation times must be positive");
    for (std::size_t a = 0; a < models.size(); ++a)
        for (std::size_t b = a + 1; b < models.size(); ++b)
            if (models[a].name == models[b].name) throw InputError("model '" + models[a].name + "' defined twice");
    for (const auto& e : estimators)
        for (const auto& name : e.models) (void)model(name);
}

double EstimateOutcome::value() const {
    return estimate ? estimate->value : std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> PipelineResult::values() const {
    std::vector<double> v;
    v.reserve(outcomes.size());
    for (const auto& o : outcomes) v.push_back(o.value());
    return v;
}

PipelineResult run_pipeline(const Dataset& data, const PipelineConfig& config) {
    config.validate();
    data.require_both_arms();
    if (config.cause > data.num_causes()) throw InputError("cause exceeds the number of causes in the data");

    PipelineResult res;
    res.grid = config.time_grid.empty() ? default_time_grid(data, config.cause) : config.time_grid;
    res.grid.insert(res.grid.end(), config.eval_times.begin(), config.eval_times.end());
    std::sort(res.grid.begin(), res.grid.end());
    res.grid.erase(std::unique(res.grid.begin(), res.grid.end()), res.grid.end());
    for (double t : config.eval_times)
        res.eval_index.push_back(
            static_cast<std::size_t>(std::lower_bound(res.grid.begin(), res.grid.end(), t) - res.grid.begin()));

    res.pseudovalues = jackknife_pseudovalues(data, config.cause, res.grid);
    const auto& pv = res.pseudovalues;
    const Eigen::VectorXd treatment = data.treatment_vector();

    // Fit each referenced model once; outcome predictions at every eval time.
    struct Fitted {
        std::string error;
        Eigen::VectorXd propensity;
        std::vector<Eigen::VectorXd> treated, control;  // per eval time
        std::optional<PSModelFit> ps;
        std::optional<ORModelFit> outcome;
    };
    std::map<std::string, Fitted> fitted;
    for (const auto& est : config.estimators) {
        for (const auto& name : est.models) {
            if (fitted.count(name)) continue;
            auto& f = fitted[name];
            const auto& spec = config.model(name);
            try {
                if (spec.role == ModelRole::propensity) {
                    f.ps = fit_logistic_ps(build_feature_matrix(spec.features, data), treatment, spec.features);
                    f.propensity = f.ps->fitted_probabilities;
                } else {
                    const Eigen::MatrixXd design = build_covariate_matrix(spec.features, data);
                    f.outcome = fit_gee_or(pv, design, treatment, spec.features);
                    for (auto j : res.eval_index) {
                        f.treated.push_back(predict_or_all(*f.outcome, design, 1, j));
                        f.control.push_back(predict_or_all(*f.outcome, design, 0, j));
                    }
                }
            } catch (const NumericError& e) {
                f.error = name + ": " + e.what();
            }
        }
    }

    for (const auto& est : config.estimators) {
        for (std::size_t e = 0; e < config.eval_times.size(); ++e) {
            EstimateOutcome out;
            out.label = est.text;
            out.eval_time = config.eval_times[e];
            const auto j = res.eval_index[e];
            try {
                for (const auto& name : est.models)
                    if (!fitted.at(name).error.empty()) throw NumericError(fitted.at(name).error);
                switch (est.method) {
                    case Method::naive: out.estimate = naive_estimate(pv, treatment, j); break;
                    case Method::ipw: out.estimate = ipw_estimate(pv, *fitted.at(est.models[0]).ps, treatment, j); break;
                    case Method::outcome_regression: {
                        const auto& f = fitted.at(est.models[0]);
                        EffectEstimate ee;
                        ee.method = Method::outcome_regression;
                        ee.cause = config.cause;
                        ee.eval_time = config.eval_times[e];
                        ee.value = (f.treated[e] - f.control[e]).mean();
                        out.estimate = std::move(ee);
                        break;
                    }
                    case Method::multiply_robust: {
                        CalibrationInputs in;
                        for (const auto& name : est.models) {
                            const auto& f = fitted.at(name);
                            if (f.ps) in.propensities.push_back(f.propensity);
                        }
                        for (const auto& name : est.models) {
                            const auto& f = fitted.at(name);
                            if (f.outcome) {
                                in.outcome_treated.push_back(f.treated[e]);
                                in.outcome_control.push_back(f.control[e]);
                            }
                        }
                        out.estimate = mr_estimate(pv, in, treatment, j, config.calibration);
                        break;
                    }
                }
                out.estimate->cause = config.cause;
                out.estimate->eval_time = config.eval_times[e];
            } catch (const NumericError& err) {
                out.estimate.reset();
                out.error = err.what();
            }
            res.outcomes.push_back(std::move(out));
        }
    }
    return res;
}

PipelineBootstrap bootstrap_pipeline(const Dataset& data, const PipelineConfig& config, int B, double alpha,
                                     std::uint64_t seed, unsigned threads) {
    PipelineBootstrap out;
    out.point = run_pipeline(data, config);
    const auto points = out.point.values();
    out.intervals = bootstrap_multi(
        data, [&](const Dataset& d) { return run_pipeline(d, config).values(); }, points, B, alpha, seed, threads);
    return out;
}

BootstrapResult bootstrap_cis(const Dataset& data, const PipelineConfig& estimator_config, int cause,
                              double eval_time, int B, double alpha, std::uint64_t seed, unsigned threads) {
    if (estimator_config.estimators.size() != 1) throw InputError("bootstrap_cis expects exactly one estimator");
    auto cfg = estimator_config;
    cfg.cause = cause;
    cfg.eval_times = {eval_time};
    auto res = bootstrap_pipeline(data, cfg, B, alpha, seed, threads);
    if (!res.point.outcomes.front().estimate)
        throw NumericError("point estimate failed: " + res.point.outcomes.front().error);
    return res.intervals.front();
}

}  // namespace mrcr
