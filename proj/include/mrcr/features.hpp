#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrcr/dataset.hpp"

namespace mrcr {

// One column of a design matrix. Covariate indices are 1-based, as in x1..xp.
struct Term {
    enum class Kind { intercept, raw, product, square, exp };
    Kind kind = Kind::intercept;
    int first = 0;
    int second = 0;

    static Term make_intercept() { return {}; }
    static Term make_raw(int j) { return {Kind::raw, j, 0}; }
    static Term make_product(int j, int l) { return {Kind::product, j, l}; }
    static Term make_square(int j) { return {Kind::square, j, 0}; }
    static Term make_exp(int j) { return {Kind::exp, j, 0}; }

    // Parses "1", "x1", "x1*x2", "x2^2", "exp(x3)".
    static Term parse(const std::string& text);
    std::string to_string() const;

    bool operator==(const Term&) const = default;
};

struct FeatureMapSpec {
    std::vector<Term> terms;
    bool includes_treatment = false;

    // Intercept first, followed by the parsed terms.
    static FeatureMapSpec from_strings(const std::vector<std::string>& terms, bool includes_treatment = false);
    std::vector<std::string> term_strings() const;  // without the intercept

    // Throws InputError unless exactly one intercept and all indices within [1, p].
    void validate(std::size_t p) const;
    // Columns excluding the intercept.
    std::size_t covariate_columns() const;

    bool operator==(const FeatureMapSpec&) const = default;
};

// n x d matrix, one column per term in order.
Eigen::MatrixXd build_feature_matrix(const FeatureMapSpec& spec, const Dataset& data);

// Same, with the intercept column removed (outcome models carry their own intercepts).
Eigen::MatrixXd build_covariate_matrix(const FeatureMapSpec& spec, const Dataset& data);

}  // namespace mrcr
