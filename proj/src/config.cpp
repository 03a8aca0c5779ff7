#include "mrcr/config.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "mrcr/errors.hpp"

namespace mrcr {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Drops a trailing '#' comment that is not inside a string literal.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

struct Entry {
    json value;
    std::size_t line;
    std::string key;
};

std::string at_line(const Entry& e) { return "line " + std::to_string(e.line) + ": key '" + e.key + "'"; }

template <typename T>
T get(const Entry& e) {
    try {
        return e.value.get<T>();
    } catch (const json::exception&) {
        throw InputError(at_line(e) + " has the wrong type");
    }
}

double get_number(const Entry& e) {
    if (!e.value.is_number()) throw InputError(at_line(e) + " must be a number");
    return e.value.get<double>();
}

std::vector<double> get_numbers(const Entry& e) {
    if (!e.value.is_array()) throw InputError(at_line(e) + " must be a list of numbers");
    std::vector<double> out;
    for (const auto& v : e.value) {
        if (!v.is_number()) throw InputError(at_line(e) + " must contain only numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::uint64_t get_count(const Entry& e) {
    if (!e.value.is_number_integer() || e.value.get<long long>() < 0)
        throw InputError(at_line(e) + " must be a non-negative integer");
    return e.value.get<std::uint64_t>();
}

json numbers_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(x);
    return a;
}

}  // namespace

RunConfig parse_run_config(std::istream& in) {
    RunConfig cfg;
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    bool estimators_table = false;
    std::vector<std::string> estimator_texts;
    std::vector<std::pair<std::string, Entry>> model_entries;
    std::vector<std::string> model_order;
    std::vector<Entry> scenario_entries;

    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(strip_comment(line));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw InputError("line " + std::to_string(line_no) + ": malformed section header");
            section = trim(text.substr(1, text.size() - 2));
            if (section.rfind("model.", 0) == 0) {
                const auto name = section.substr(6);
                for (const auto& m : model_order)
                    if (m == name) throw InputError("line " + std::to_string(line_no) + ": model '" + name + "' defined twice");
                model_order.push_back(name);
            } else if (section != "run" && section != "scenario" && section != "estimation" && section != "bench") {
                throw InputError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw InputError("line " + std::to_string(line_no) + ": expected key = value");
        Entry e;
        e.key = trim(text.substr(0, eq));
        e.line = line_no;
        try {
            e.value = json::parse(trim(text.substr(eq + 1)));
        } catch (const json::exception&) {
            throw InputError("line " + std::to_string(line_no) + ": cannot parse value of '" + e.key + "'");
        }
        if (section.empty()) throw InputError("line " + std::to_string(line_no) + ": key outside of any section");

        if (section == "run") {
            if (e.key == "input") cfg.input_path = get<std::string>(e);
            else if (e.key == "output") cfg.output_path = get<std::string>(e);
            else if (e.key == "seed") cfg.seed = get_count(e);
            else if (e.key == "threads") cfg.threads = static_cast<unsigned>(get_count(e));
            else throw InputError(at_line(e) + " is not a [run] key");
        } else if (section == "scenario") {
            scenario_entries.push_back(e);
        } else if (section == "estimation") {
            if (e.key == "cause") cfg.pipeline.cause = static_cast<int>(get_count(e));
            else if (e.key == "eval_times") cfg.pipeline.eval_times = get_numbers(e);
            else if (e.key == "time_grid") cfg.pipeline.time_grid = get_numbers(e);
            else if (e.key == "bootstrap") cfg.bootstrap = static_cast<int>(get_count(e));
            else if (e.key == "alpha") cfg.alpha = get_number(e);
            else if (e.key == "estimators") {
                if (e.value.is_string() && e.value.get<std::string>() == "table") estimators_table = true;
                else estimator_texts = get<std::vector<std::string>>(e);
            } else throw InputError(at_line(e) + " is not an [estimation] key");
        } else if (section == "bench") {
            if (e.key == "replicates") cfg.replicates = static_cast<int>(get_count(e));
            else if (e.key == "truth_mc") cfg.truth_mc = get_count(e);
            else if (e.key == "calibration_mc") cfg.calibration_mc = get_count(e);
            else if (e.key == "eval_time_mc") cfg.eval_time_mc = get_count(e);
            else throw InputError(at_line(e) + " is not a [bench] key");
        } else {
            model_entries.emplace_back(section.substr(6), e);
        }
    }

    if (!scenario_entries.empty()) {
        ScenarioConfig sc;
        for (const auto& e : scenario_entries)
            if (e.key == "preset") {
                if (get<std::string>(e) != "standard") throw InputError(at_line(e) + ": unknown preset");
                sc = ScenarioConfig::standard();
            }
        for (const auto& e : scenario_entries) {
            if (e.key == "preset") continue;
            if (e.key == "n") sc.n = get_count(e);
            else if (e.key == "p") sc.p = get_count(e);
            else if (e.key == "num_causes") sc.num_causes = static_cast<int>(get_count(e));
            else if (e.key == "baseline_hazards") sc.baseline_hazards = get_numbers(e);
            else if (e.key == "time_effects") sc.time_effects = get_numbers(e);
            else if (e.key == "treatment_effects") sc.treatment_effects = get_numbers(e);
            else if (e.key == "ps_coefficients") sc.ps_coefficients = get_numbers(e);
            else if (e.key == "covariate_effects") {
                if (!e.value.is_array()) throw InputError(at_line(e) + " must be a list of lists");
                sc.covariate_effects.clear();
                for (const auto& row : e.value) {
                    Entry sub{row, e.line, e.key};
                    sc.covariate_effects.push_back(get_numbers(sub));
                }
            } else if (e.key == "censor_max") {
                if (e.value.is_null()) sc.censor_max.reset();
                else sc.censor_max = get_number(e);
            } else if (e.key == "censoring_rate") {
                if (e.value.is_null()) cfg.censoring_rate.reset();
                else cfg.censoring_rate = get_number(e);
            } else throw InputError(at_line(e) + " is not a [scenario] key");
        }
        sc.validate();
        if (cfg.censoring_rate && !(*cfg.censoring_rate >= 0.0 && *cfg.censoring_rate < 1.0))
            throw InputError("censoring_rate must lie in [0,1)");
        cfg.scenario = std::move(sc);
    }

    for (const auto& name : model_order) {
        std::optional<std::vector<std::string>> terms;
        std::optional<bool> treatment;
        for (const auto& [owner, e] : model_entries) {
            if (owner != name) continue;
            if (e.key == "terms") terms = get<std::vector<std::string>>(e);
            else if (e.key == "treatment") treatment = get<bool>(e);
            else throw InputError(at_line(e) + " is not a model key");
        }
        if (!terms) throw InputError("model '" + name + "' has no terms");
        auto spec = ModelSpec::make(name, *terms);
        if (treatment) {
            if (spec.role != ModelRole::outcome) throw InputError("model '" + name + "': treatment applies to outcome models");
            spec.features.includes_treatment = *treatment;
        }
        cfg.pipeline.models.push_back(std::move(spec));
    }

    if (estimators_table) cfg.pipeline.estimators = table_labels(cfg.pipeline.models);
    for (const auto& t : estimator_texts) cfg.pipeline.estimators.push_back(EstimatorLabel::parse(t));
    for (const auto& e : cfg.pipeline.estimators)
        for (const auto& name : e.models) (void)cfg.pipeline.model(name);
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config '" + path + "'");
    return parse_run_config(in);
}

void write_run_config(std::ostream& out, const RunConfig& cfg) {
    out << "[run]\n";
    if (!cfg.input_path.empty()) out << "input = " << json(cfg.input_path).dump() << '\n';
    if (!cfg.output_path.empty()) out << "output = " << json(cfg.output_path).dump() << '\n';
    out << "seed = " << cfg.seed << '\n';
    if (cfg.scenario) {
        const auto& s = *cfg.scenario;
        out << "\n[scenario]\n";
        out << "n = " << s.n << "\np = " << s.p << "\nnum_causes = " << s.num_causes << '\n';
        out << "baseline_hazards = " << numbers_json(s.baseline_hazards).dump() << '\n';
        out << "time_effects = " << numbers_json(s.time_effects).dump() << '\n';
        out << "treatment_effects = " << numbers_json(s.treatment_effects).dump() << '\n';
        json xi = json::array();
        for (const auto& row : s.covariate_effects) xi.push_back(numbers_json(row));
        out << "covariate_effects = " << xi.dump() << '\n';
        out << "ps_coefficients = " << numbers_json(s.ps_coefficients).dump() << '\n';
        out << "censor_max = " << (s.censor_max ? json(*s.censor_max) : json(nullptr)).dump() << '\n';
    }
    const auto& p = cfg.pipeline;
    out << "\n[estimation]\ncause = " << p.cause << '\n';
    if (!p.eval_times.empty()) out << "eval_times = " << numbers_json(p.eval_times).dump() << '\n';
    if (!p.time_grid.empty()) out << "time_grid = " << numbers_json(p.time_grid).dump() << '\n';
    if (!p.estimators.empty()) {
        json labels = json::array();
        for (const auto& e : p.estimators) labels.push_back(e.text);
        out << "estimators = " << labels.dump() << '\n';
    }
    out << "bootstrap = " << cfg.bootstrap << "\nalpha = " << json(cfg.alpha).dump() << '\n';
    out << "\n[bench]\nreplicates = " << cfg.replicates << "\ntruth_mc = " << cfg.truth_mc
        << "\ncalibration_mc = " << cfg.calibration_mc << "\neval_time_mc = " << cfg.eval_time_mc << '\n';
    for (const auto& m : p.models) {
        out << "\n[model." << m.name << "]\nterms = " << json(m.features.term_strings()).dump() << '\n';
        if (m.role == ModelRole::outcome && !m.features.includes_treatment) out << "treatment = false\n";
    }
}

}  // namespace mrcr
