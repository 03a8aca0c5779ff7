#include <doctest.h>

#include <cmath>
#include <cstring>

#include "mrcr/bootstrap.hpp"
#include "mrcr/errors.hpp"
#include "mrcr/pipeline.hpp"
#include "mrcr/rng.hpp"
#include "mrcr/simulation.hpp"
#include "mrcr/survival.hpp"

using namespace mrcr;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool identical(const BootstrapResult& a, const BootstrapResult& b) {
    if (a.replicate_estimates.size() != b.replicate_estimates.size()) return false;
    for (std::size_t k = 0; k < a.replicate_estimates.size(); ++k)
        if (!same_bits(a.replicate_estimates[k], b.replicate_estimates[k])) return false;
    return a.failed_replicates == b.failed_replicates && same_bits(a.point_estimate, b.point_estimate) &&
           same_bits(a.variance, b.variance) && same_bits(a.ci_normal.lower, b.ci_normal.lower) &&
           same_bits(a.ci_normal.upper, b.ci_normal.upper) &&
           same_bits(a.ci_percentile.lower, b.ci_percentile.lower) &&
           same_bits(a.ci_percentile.upper, b.ci_percentile.upper) &&
           same_bits(a.ci_pivotal.lower, b.ci_pivotal.lower) && same_bits(a.ci_pivotal.upper, b.ci_pivotal.upper);
}

double two_pass_variance(const std::vector<double>& x) {
    long double mean = 0;
    for (double v : x) mean += v;
    mean /= static_cast<long double>(x.size());
    long double ss = 0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return static_cast<double>(ss / static_cast<long double>(x.size() - 1));
}

PipelineConfig mr_config(const std::string& label) {
    PipelineConfig c;
    c.models = {ModelSpec::make("p1", {"x1", "x2", "x3"}), ModelSpec::make("p2", {"x1*x2", "x2^2", "exp(x3)"}),
                ModelSpec::make("q1", {"x1", "x2", "x3"}), ModelSpec::make("q2", {"x1*x2", "x2^2", "exp(x3)"})};
    c.estimators = {EstimatorLabel::parse(label)};
    return c;
}

Dataset sample(std::size_t n, std::uint64_t seed) {
    auto sc = ScenarioConfig::standard();
    sc.n = n;
    sc.censor_max = 3.4;
    return generate_dataset(sc, seed);
}

}  // namespace

TEST_SUITE("bootstrap") {

TEST_CASE("constant replicates give a point interval") {
    const double c = 0.123;
    const auto r = summarize_bootstrap(c, std::vector<double>(50, c), 0.05);
    CHECK(r.variance == 0.0);
    for (const auto& ci : {r.ci_normal, r.ci_percentile, r.ci_pivotal}) {
        CHECK(ci.lower == c);
        CHECK(ci.upper == c);
    }
}

TEST_CASE("two-point replicate distribution") {
    const int B = 200;
    std::vector<double> reps;
    for (int b = 0; b < B; ++b) reps.push_back(b % 2 == 0 ? 0.0 : 1.0);
    const auto r = summarize_bootstrap(0.5, reps, 0.05);
    const double var = B / (4.0 * (B - 1));
    CHECK(r.variance == doctest::Approx(var).epsilon(1e-14));
    const double half = 1.959963984540054 * std::sqrt(var);
    CHECK(r.ci_normal.lower == doctest::Approx(0.5 - half).epsilon(1e-12));
    CHECK(r.ci_normal.upper == doctest::Approx(0.5 + half).epsilon(1e-12));
    CHECK(r.ci_percentile.lower == 0.0);
    CHECK(r.ci_percentile.upper == 1.0);
}

TEST_CASE("normal quantile and type-7 quantiles") {
    CHECK(normal_upper_quantile(0.025) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(normal_upper_quantile(0.05) == doctest::Approx(1.6448536269514722).epsilon(1e-14));
    CHECK(quantile_type7({4, 1, 3, 2}, 0.25) == doctest::Approx(1.75));
    CHECK(quantile_type7({4, 1, 3, 2}, 0.0) == 1.0);
    CHECK(quantile_type7({4, 1, 3, 2}, 1.0) == 4.0);
    CHECK(quantile_type7({10, 20}, 0.975) == doctest::Approx(19.75));
}

TEST_CASE("variance and interval identities on random replicates") {
    Rng rng(8);
    for (int k = 0; k < 20; ++k) {
        std::vector<double> reps;
        for (int b = 0; b < 200; ++b) reps.push_back(0.1 + 0.05 * rng.normal());
        const double point = 0.1 + 0.01 * rng.normal();
        const auto r = summarize_bootstrap(point, reps, 0.05);
        CHECK(std::abs(r.variance - two_pass_variance(reps)) < 1e-12);
        CHECK(r.ci_pivotal.lower == 2.0 * point - r.ci_percentile.upper);
        CHECK(r.ci_pivotal.upper == 2.0 * point - r.ci_percentile.lower);
        CHECK(r.ci_normal.lower <= r.ci_normal.upper);
        CHECK(r.ci_percentile.lower <= r.ci_percentile.upper);
        CHECK(r.ci_pivotal.lower <= r.ci_pivotal.upper);
    }
}

TEST_CASE("failed replicates are excluded and a large share is flagged") {
    std::vector<double> reps(100, 1.0);
    reps[3] = std::nan("");
    reps[4] = 2.0;
    auto r = summarize_bootstrap(1.0, reps, 0.05);
    CHECK(r.failed_replicates == std::vector<std::size_t>{3});
    CHECK(r.replicate_estimates.size() == 99);
    CHECK_FALSE(r.degenerate);
    for (int k = 10; k < 16; ++k) reps[static_cast<std::size_t>(k)] = std::nan("");
    r = summarize_bootstrap(1.0, reps, 0.05);
    CHECK(r.failed_replicates.size() == 7);
    CHECK(r.degenerate);
}

TEST_CASE("resample indices follow the documented stream") {
    const auto idx = bootstrap_indices(37, 1000, 5);
    Rng rng(1005);
    for (std::size_t i : idx) {
        CHECK(i < 37);
        CHECK(i == rng.index(37));
    }
}

TEST_CASE("uniform mapping is portable") {
    Rng rng(42);
    std::mt19937_64 engine(42);
    const auto x = engine();
    CHECK(rng.uniform() == (static_cast<double>(x >> 11) + 0.5) / 9007199254740992.0);
}

TEST_CASE("same seed reproduces the result bit for bit") {
    const auto d = sample(150, 3);
    const auto cfg = mr_config("MRp1p2q1q2");
    const auto a = bootstrap_cis(d, cfg, 1, 0.25, 30, 0.05, 77);
    const auto b = bootstrap_cis(d, cfg, 1, 0.25, 30, 0.05, 77);
    CHECK(identical(a, b));
    const auto c = bootstrap_cis(d, cfg, 1, 0.25, 30, 0.05, 78);
    CHECK_FALSE(identical(a, c));
}

TEST_CASE("thread count does not change the result") {
    const auto d = sample(150, 4);
    auto cfg = mr_config("MRp1q1");
    cfg.estimators.push_back(EstimatorLabel::parse("naive"));
    cfg.estimators.push_back(EstimatorLabel::parse("q2"));
    cfg.eval_times = {0.2, 0.3};
    const auto one = bootstrap_pipeline(d, cfg, 25, 0.05, 5, 1);
    const auto four = bootstrap_pipeline(d, cfg, 25, 0.05, 5, 4);
    REQUIRE(one.intervals.size() == four.intervals.size());
    for (std::size_t k = 0; k < one.intervals.size(); ++k) CHECK(identical(one.intervals[k], four.intervals[k]));
}

TEST_CASE("replicates refit every model on the resample") {
    const auto d = sample(120, 6);
    const auto cfg = mr_config("q1");
    const auto r = bootstrap_cis(d, cfg, 1, 0.25, 3, 0.05, 10);
    auto single = cfg;
    single.eval_times = {0.25};
    const auto idx = bootstrap_indices(d.size(), 10, 1);
    const auto resample = d.subset(idx);
    CHECK(r.replicate_estimates[1] == run_pipeline(resample, single).outcomes[0].value());
}

TEST_CASE("single-estimator interface validates its configuration") {
    const auto d = sample(80, 2);
    auto cfg = mr_config("p1");
    cfg.estimators.push_back(EstimatorLabel::parse("q1"));
    CHECK_THROWS_AS(bootstrap_cis(d, cfg, 1, 0.2, 5, 0.05, 1), InputError);
    CHECK_THROWS_AS(summarize_bootstrap(0.0, {1.0, 2.0}, 1.5), InputError);
}

}  // TEST_SUITE

TEST_SUITE("pipeline") {

TEST_CASE("labels parse into methods and model lists") {
    CHECK(EstimatorLabel::parse("naive").method == Method::naive);
    CHECK(EstimatorLabel::parse("p2").method == Method::ipw);
    CHECK(EstimatorLabel::parse("q1").method == Method::outcome_regression);
    const auto mr = EstimatorLabel::parse("MRp1p2q1q2");
    CHECK(mr.method == Method::multiply_robust);
    CHECK(mr.models == std::vector<std::string>{"p1", "p2", "q1", "q2"});
    CHECK_THROWS_AS(EstimatorLabel::parse("MRx1"), InputError);
    CHECK_THROWS_AS(EstimatorLabel::parse("r1"), InputError);
}

TEST_CASE("standard menu has the nineteen rows in table order") {
    const auto labels = table_labels(mr_config("naive").models);
    const std::vector<std::string> expected{
        "p1",     "p2",     "q1",     "q2",       "MRp1",     "MRp2",     "MRq1",
        "MRq2",   "MRp1p2", "MRp1q1", "MRp1q2",   "MRp2q1",   "MRp2q2",   "MRq1q2",
        "MRp1p2q1", "MRp1p2q2", "MRp1q1q2", "MRp2q1q2", "MRp1p2q1q2"};
    REQUIRE(labels.size() == expected.size());
    for (std::size_t k = 0; k < labels.size(); ++k) CHECK(labels[k].text == expected[k]);
}

TEST_CASE("failing models are reported per estimator") {
    const auto d = sample(100, 7);
    auto cfg = mr_config("p1");
    cfg.models.push_back(ModelSpec::make("p3", {"x1", "x1"}));
    cfg.estimators = {EstimatorLabel::parse("p1"), EstimatorLabel::parse("p3"), EstimatorLabel::parse("MRp1p3")};
    cfg.eval_times = {0.2};
    const auto res = run_pipeline(d, cfg);
    CHECK(res.outcomes[0].estimate.has_value());
    CHECK_FALSE(res.outcomes[1].estimate.has_value());
    CHECK(res.outcomes[1].error.find("p3") != std::string::npos);
    CHECK_FALSE(res.outcomes[2].estimate.has_value());
}

TEST_CASE("unknown models are an input error") {
    auto cfg = mr_config("MRp1p9");
    cfg.eval_times = {0.2};
    CHECK_THROWS_AS(cfg.validate(), InputError);
}

}  // TEST_SUITE
