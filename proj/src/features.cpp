#include "mrcr/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>

#include "mrcr/errors.hpp"

namespace mrcr {

namespace {

std::string strip(const std::string& s) {
    std::string out;
    for (char ch : s)
        if (!std::isspace(static_cast<unsigned char>(ch))) out += ch;
    return out;
}

double term_value(const Term& t, const std::vector<double>& x) {
    switch (t.kind) {
        case Term::Kind::intercept: return 1.0;
        case Term::Kind::raw: return x[t.first - 1];
        case Term::Kind::product: return x[t.first - 1] * x[t.second - 1];
        case Term::Kind::square: return x[t.first - 1] * x[t.first - 1];
        case Term::Kind::exp: return std::exp(x[t.first - 1]);
    }
    return 0.0;
}

}  // namespace

Term Term::parse(const std::string& text) {
    static const std::regex raw_re(R"(x([0-9]+))");
    static const std::regex product_re(R"(x([0-9]+)\*x([0-9]+))");
    static const std::regex square_re(R"(x([0-9]+)\^2)");
    static const std::regex exp_re(R"(exp\(x([0-9]+)\))");
    const auto s = strip(text);
    std::smatch m;
    const auto index = [&](int k) {
        const int j = std::stoi(m[k]);
        if (j < 1) throw InputError("covariate indices start at 1 in model term '" + text + "'");
        return j;
    };
    if (s == "1" || s == "intercept") return make_intercept();
    if (std::regex_match(s, m, raw_re)) return make_raw(index(1));
    if (std::regex_match(s, m, product_re)) return make_product(index(1), index(2));
    if (std::regex_match(s, m, square_re)) return make_square(index(1));
    if (std::regex_match(s, m, exp_re)) return make_exp(index(1));
    throw InputError("unrecognised model term '" + text + "'");
}

std::string Term::to_string() const {
    switch (kind) {
        case Kind::intercept: return "1";
        case Kind::raw: return "x" + std::to_string(first);
        case Kind::product: return "x" + std::to_string(first) + "*x" + std::to_string(second);
        case Kind::square: return "x" + std::to_string(first) + "^2";
        case Kind::exp: return "exp(x" + std::to_string(first) + ")";
    }
    return {};
}

FeatureMapSpec FeatureMapSpec::from_strings(const std::vector<std::string>& terms, bool includes_treatment) {
    FeatureMapSpec spec;
    spec.includes_treatment = includes_treatment;
    spec.terms.push_back(Term::make_intercept());
    for (const auto& t : terms) {
        auto term = Term::parse(t);
        if (term.kind == Term::Kind::intercept) continue;
        spec.terms.push_back(term);
    }
    return spec;
}

std::vector<std::string> FeatureMapSpec::term_strings() const {
    std::vector<std::string> out;
    for (const auto& t : terms)
        if (t.kind != Term::Kind::intercept) out.push_back(t.to_string());
    return out;
}

void FeatureMapSpec::validate(std::size_t p) const {
    const auto intercepts =
        std::count_if(terms.begin(), terms.end(), [](const Term& t) { return t.kind == Term::Kind::intercept; });
    if (intercepts != 1) throw InputError("feature map must contain exactly one intercept term");
    const int pmax = static_cast<int>(p);
    for (const auto& t : terms) {
        if (t.kind == Term::Kind::intercept) continue;
        const bool bad = t.first < 1 || t.first > pmax ||
                         (t.kind == Term::Kind::product && (t.second < 1 || t.second > pmax));
        if (bad)
            throw InputError("term '" + t.to_string() + "' references a covariate outside x1..x" +
                             std::to_string(p));
    }
}

std::size_t FeatureMapSpec::covariate_columns() const { return terms.size() - 1; }

Eigen::MatrixXd build_feature_matrix(const FeatureMapSpec& spec, const Dataset& data) {
    spec.validate(data.covariate_dim());
    Eigen::MatrixXd m(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(spec.terms.size()));
    for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t c = 0; c < spec.terms.size(); ++c)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                term_value(spec.terms[c], data[i].covariates);
    return m;
}

Eigen::MatrixXd build_covariate_matrix(const FeatureMapSpec& spec, const Dataset& data) {
    spec.validate(data.covariate_dim());
    Eigen::MatrixXd m(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(spec.covariate_columns()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        Eigen::Index c = 0;
        for (const auto& t : spec.terms)
            if (t.kind != Term::Kind::intercept) m(static_cast<Eigen::Index>(i), c++) = term_value(t, data[i].covariates);
    }
    return m;
}

}  // namespace mrcr
