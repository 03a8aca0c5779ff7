#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mrcr/dataset.hpp"
#include "mrcr/survival.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Workdir {
public:
    explicit Workdir(const std::string& name) : path_(fs::temp_directory_path() / ("mrcr_cli_" + name)) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~Workdir() { fs::remove_all(path_); }
    std::string operator/(const std::string& file) const { return (path_ / file).string(); }

private:
    fs::path path_;
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run(const std::string& args, const std::string& log = "/dev/null") {
    const std::string cmd = std::string(MRCR_CLI) + " " + args + " >" + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::string kModels = R"cfg(
[model.p1]
terms = ["x1", "x2", "x3"]
[model.p2]
terms = ["x1*x2", "x2^2", "exp(x3)"]
[model.q1]
terms = ["x1", "x2", "x3"]
[model.q2]
terms = ["x1*x2", "x2^2", "exp(x3)"]
)cfg";

std::string simulate_config(std::size_t n, double rate) {
    return "[scenario]\npreset = \"standard\"\nn = " + std::to_string(n) +
           "\ncensoring_rate = " + std::to_string(rate) + "\n[bench]\ncalibration_mc = 50000\n";
}

std::vector<std::map<std::string, std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    std::stringstream hs(line);
    for (std::string f; std::getline(hs, f, ',');) header.push_back(f);
    std::vector<std::map<std::string, std::string>> rows;
    while (std::getline(in, line)) {
        std::stringstream ls(line);
        std::map<std::string, std::string> row;
        std::size_t k = 0;
        for (std::string f; std::getline(ls, f, ',');) row[header.at(k++)] = f;
        for (; k < header.size(); ++k) row[header[k]] = "";
        rows.push_back(row);
    }
    return rows;
}

void compare_json(const json& got, const json& want, const std::string& where) {
    INFO(where);
    if (want.is_number()) {
        REQUIRE(got.is_number());
        const double a = got.get<double>(), b = want.get<double>();
        CHECK(std::abs(a - b) <= 1e-9 * (1.0 + std::abs(b)));
    } else if (want.is_array()) {
        REQUIRE(got.is_array());
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) compare_json(got[i], want[i], where + "[" + std::to_string(i) + "]");
    } else if (want.is_object()) {
        REQUIRE(got.is_object());
        CHECK(got.size() == want.size());
        for (auto it = want.begin(); it != want.end(); ++it) {
            REQUIRE(got.contains(it.key()));
            compare_json(got[it.key()], it.value(), where + "." + it.key());
        }
    } else {
        CHECK(got == want);
    }
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate writes a reproducible dataset") {
    Workdir w("simulate");
    write_file(w / "sim.cfg", simulate_config(500, 0.25));
    REQUIRE(run("--config " + w / "sim.cfg" + " --seed 11 --out " + w / "a.csv" + " simulate") == 0);
    REQUIRE(run("--config " + w / "sim.cfg" + " --seed 11 --out " + w / "b.csv" + " simulate") == 0);
    const auto text = read_file(w / "a.csv");
    CHECK(text == read_file(w / "b.csv"));
    CHECK(text.rfind("id,time,status,treatment,x1,x2,x3\n", 0) == 0);
    const auto d = mrcr::read_dataset_csv_file(w / "a.csv");
    CHECK(d.size() == 500);
    double censored = 0;
    for (const auto& r : d.records()) censored += r.status == 0 ? 1.0 : 0.0;
    CHECK(censored / 500.0 >= 0.20);
    CHECK(censored / 500.0 <= 0.30);

    // The sidecar config regenerates the same file.
    REQUIRE(run("--config " + w / "a.csv.config" + " --out " + w / "c.csv" + " simulate") == 0);
    CHECK(read_file(w / "c.csv") == text);
    REQUIRE(run("--config " + w / "sim.cfg" + " --seed 12 --out " + w / "d.csv" + " simulate") == 0);
    CHECK(read_file(w / "d.csv") != text);
}

TEST_CASE("naive estimate on a hand-checked file") {
    Workdir w("naive");
    write_file(w / "d.csv",
               "id,time,status,treatment,x1\n"
               "1,1.0,1,1,0.1\n2,2.0,2,1,0.2\n3,3.0,1,1,0.3\n"
               "4,0.5,2,0,0.4\n5,1.5,1,0,0.5\n6,2.5,1,0,0.6\n");
    write_file(w / "e.cfg", "[estimation]\neval_times = [2.0]\nestimators = [\"naive\"]\nbootstrap = 20\n");
    REQUIRE(run("--config " + w / "e.cfg" + " --input " + w / "d.csv" + " --out " + w / "r.json estimate") == 0);
    const auto r = json::parse(read_file(w / "r.json"));
    REQUIRE(r["estimates"].size() == 1);
    const auto& e = r["estimates"][0];
    CHECK(e["label"] == "naive");
    CHECK(e["method"] == "naive");
    // Indicators at t = 2: treated {1,0,0}, control {0,1,0}; (1 - 1) / 6.
    CHECK(e["estimate"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e["ci_normal"].size() == 2);

    write_file(w / "e2.cfg", "[estimation]\neval_times = [1.0]\nestimators = [\"naive\"]\nbootstrap = 20\n");
    REQUIRE(run("--config " + w / "e2.cfg" + " --input " + w / "d.csv" + " --out " + w / "r2.json estimate") == 0);
    // Treated {1,0,0}, control {0,0,0}: 1 / 6.
    CHECK(json::parse(read_file(w / "r2.json"))["estimates"][0]["estimate"].get<double>() ==
          doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("estimate report matches the frozen reference") {
    const std::string data = std::string(MRCR_TEST_DATA) + "/estimate_input.csv";
    const std::string cfg = std::string(MRCR_TEST_DATA) + "/estimate.cfg";
    Workdir w("golden");
    REQUIRE(run("--config " + cfg + " --input " + data + " --threads 2 --out " + w / "r.json estimate") == 0);
    const auto got = json::parse(read_file(w / "r.json"));
    const auto want = json::parse(read_file(std::string(MRCR_TEST_DATA) + "/estimate_golden.json"));
    compare_json(got, want, "report");
}

TEST_CASE("duplicate candidate models leave the estimate unchanged") {
    Workdir w("duplicate");
    const std::string data = std::string(MRCR_TEST_DATA) + "/estimate_input.csv";
    write_file(w / "a.cfg", "[estimation]\neval_times = [0.3]\nestimators = [\"MRp1q1\"]\nbootstrap = 10\n" + kModels);
    write_file(w / "b.cfg", "[estimation]\neval_times = [0.3]\nestimators = [\"MRp1p3q1\"]\nbootstrap = 10\n" +
                                kModels + "[model.p3]\nterms = [\"x1\", \"x2\", \"x3\"]\n");
    REQUIRE(run("--config " + w / "a.cfg" + " --input " + data + " --out " + w / "a.json estimate") == 0);
    REQUIRE(run("--config " + w / "b.cfg" + " --input " + data + " --out " + w / "b.json estimate") == 0);
    const double a = json::parse(read_file(w / "a.json"))["estimates"][0]["estimate"].get<double>();
    const double b = json::parse(read_file(w / "b.json"))["estimates"][0]["estimate"].get<double>();
    CHECK(std::abs(a - b) < 1e-8);
}

TEST_CASE("pseudo-value export") {
    Workdir w("pseudo");
    write_file(w / "sim.cfg", "[scenario]\npreset = \"standard\"\nn = 60\n");
    REQUIRE(run("--config " + w / "sim.cfg" + " --seed 3 --out " + w / "d.csv simulate") == 0);
    write_file(w / "p.cfg", "[estimation]\ntime_grid = [0.1, 0.3, 0.8]\n");
    REQUIRE(run("--config " + w / "p.cfg" + " --input " + w / "d.csv" + " --out " + w / "pv.csv pseudovalues") == 0);
    const auto rows = read_csv(w / "pv.csv");
    const auto d = mrcr::read_dataset_csv_file(w / "d.csv");
    REQUIRE(rows.size() == d.size());
    CHECK(rows[0].size() == 4);
    const std::vector<std::pair<std::string, double>> cols{{"0.10000000000000001", 0.1}, {"0.29999999999999999", 0.3},
                                                           {"0.80000000000000004", 0.8}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].at("id") == std::to_string(i + 1));
        for (const auto& [name, t] : cols) {
            const double want = (d[i].status == 1 && d[i].time <= t) ? 1.0 : 0.0;
            CHECK(std::stod(rows[i].at(name)) == want);
        }
    }

    write_file(w / "cens.cfg", "[scenario]\npreset = \"standard\"\nn = 50\ncensor_max = 1.5\n");
    REQUIRE(run("--config " + w / "cens.cfg" + " --seed 4 --out " + w / "c.csv simulate") == 0);
    REQUIRE(run("--config " + w / "p.cfg" + " --input " + w / "c.csv" + " --out " + w / "pvc.csv pseudovalues") == 0);
    const auto c = mrcr::read_dataset_csv_file(w / "c.csv");
    const auto crow = read_csv(w / "pvc.csv");
    const auto brute = mrcr::jackknife_pseudovalues_bruteforce(c, 1, std::vector<double>{0.1, 0.3, 0.8});
    for (std::size_t i = 0; i < crow.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            CHECK(std::abs(std::stod(crow[i].at(cols[j].first)) -
                           brute.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) < 1e-10);
}

TEST_CASE("bench with a single replicate reports no SD") {
    Workdir w("bench1");
    write_file(w / "b.cfg", simulate_config(120, 0.1) +
                                "replicates = 1\ntruth_mc = 20000\neval_time_mc = 20000\n"
                                "[estimation]\nbootstrap = 10\nestimators = [\"naive\", \"MRp1q1\"]\n" + kModels);
    REQUIRE(run("--config " + w / "b.cfg" + " --out " + w / "r.json bench") == 0);
    const auto r = json::parse(read_file(w / "r.json"));
    REQUIRE(r["rows"].size() == 2);
    for (const auto& row : r["rows"]) CHECK(row["sd"] == "n/a");
    CHECK(read_csv(w / "r.json.replicates.csv").size() == 2);
}

TEST_CASE("bench summaries agree with the replicate dump") {
    Workdir w("bench5");
    write_file(w / "b.cfg", simulate_config(150, 0.25) +
                                "replicates = 6\ntruth_mc = 20000\neval_time_mc = 20000\n"
                                "[estimation]\nbootstrap = 15\nestimators = [\"q1\", \"MRp1p2q1q2\"]\n" + kModels);
    REQUIRE(run("--config " + w / "b.cfg" + " --threads 2 --out " + w / "r.json bench", w / "table.txt") == 0);
    CHECK(read_file(w / "table.txt").find("MRp1p2q1q2") != std::string::npos);
    const auto r = json::parse(read_file(w / "r.json"));
    const auto dump = read_csv(w / "r.json.replicates.csv");
    const double truth = r["truth"].get<double>();
    for (const auto& row : r["rows"]) {
        const std::string label = row["label"];
        std::vector<double> est;
        double covered = 0;
        for (const auto& d : dump) {
            if (d.at("label") != label || !d.at("error").empty()) continue;
            CHECK(std::stod(d.at("truth")) == truth);
            est.push_back(std::stod(d.at("estimate")));
            covered += (std::stod(d.at("normal_lower")) <= truth && truth <= std::stod(d.at("normal_upper"))) ? 1 : 0;
        }
        REQUIRE(est.size() == row["used"].get<std::size_t>());
        const double m = static_cast<double>(est.size());
        double mean = 0, mse = 0;
        for (double e : est) {
            mean += e / m;
            mse += (e - truth) * (e - truth) / m;
        }
        double ss = 0;
        for (double e : est) ss += (e - mean) * (e - mean);
        const double sd = std::sqrt(ss / (m - 1));
        CHECK(row["bias"].get<double>() == doctest::Approx(mean - truth).epsilon(1e-10));
        CHECK(row["mse"].get<double>() == doctest::Approx(mse).epsilon(1e-10));
        CHECK(row["sd"].get<double>() == doctest::Approx(sd).epsilon(1e-10));
        CHECK(row["mse"].get<double>() ==
              doctest::Approx(std::pow(mean - truth, 2) + (m - 1) / m * sd * sd).epsilon(1e-10));
        CHECK(row["coverage_normal"].get<double>() == doctest::Approx(100.0 * covered / m));
    }
}

TEST_CASE("errors map to exit codes") {
    Workdir w("errors");
    CHECK(run("--config " + w / "missing.cfg" + " estimate") == 1);
    CHECK(run("estimate") == 1);
    CHECK(run("--config x.cfg") == 1);

    write_file(w / "bad.cfg", "[estimation]\neval_times = [0.2]\n\nbootstrap = \"many\"\n");
    REQUIRE(run("--config " + w / "bad.cfg" + " --input x.csv estimate", w / "log.txt") == 1);
    CHECK(read_file(w / "log.txt").find("line 4") != std::string::npos);

    write_file(w / "unknown.cfg", "[estimation]\nbogus = 1\n");
    REQUIRE(run("--config " + w / "unknown.cfg" + " --input x.csv estimate", w / "log.txt") == 1);
    CHECK(read_file(w / "log.txt").find("line 2") != std::string::npos);

    write_file(w / "d.csv", "id,time,status,treatment,x1\n1,-1.0,1,1,0.1\n");
    write_file(w / "e.cfg", "[estimation]\neval_times = [0.2]\n");
    CHECK(run("--config " + w / "e.cfg" + " --input " + w / "d.csv estimate") == 1);

    // Negative time effects leave a share of subjects who never fail.
    write_file(w / "cure.cfg", "[scenario]\npreset = \"standard\"\nn = 500\ntime_effects = [-1.5, -1.5]\n");
    CHECK(run("--config " + w / "cure.cfg" + " --out " + w / "cure.csv simulate") == 2);

    // One arm empty after the data load.
    write_file(w / "arm.csv", "id,time,status,treatment,x1\n1,1.0,1,1,0.1\n2,2.0,1,1,0.2\n");
    CHECK(run("--config " + w / "e.cfg" + " --input " + w / "arm.csv estimate") != 0);

    // Every subject fails before the evaluation time in one arm: positivity breaks for p1.
    write_file(w / "sep.csv",
               "id,time,status,treatment,x1,x2,x3\n"
               "1,1,1,1,5,0,0\n2,1,1,1,6,0,0\n3,1,1,1,7,0,0\n4,1,1,0,-5,0,0\n5,1,1,0,-6,0,0\n6,1,1,0,-7,0,0\n");
    write_file(w / "sep.cfg", "[estimation]\neval_times = [2.0]\nestimators = [\"p1\"]\nbootstrap = 5\n" + kModels);
    REQUIRE(run("--config " + w / "sep.cfg" + " --input " + w / "sep.csv" + " --out " + w / "sep.json estimate") ==
            0);
    CHECK(json::parse(read_file(w / "sep.json"))["estimates"][0].contains("error"));
}

}  // TEST_SUITE
