#include "mrcr/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mrcr/errors.hpp"

namespace mrcr {

Dataset::Dataset(std::vector<ObservedRecord> records, int num_causes)
    : records_(std::move(records)), num_causes_(num_causes) {
    if (records_.empty()) throw InputError("dataset is empty");
    if (num_causes_ < 1) throw InputError("number of causes must be at least 1");
    dim_ = records_.front().covariates.size();
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        const auto where = " (record " + std::to_string(i + 1) + ")";
        if (!(r.time > 0.0) || !std::isfinite(r.time))
            throw InputError("observed time must be positive and finite" + where);
        if (r.status < 0 || r.status > num_causes_)
            throw InputError("event code " + std::to_string(r.status) + " outside 0.." +
                             std::to_string(num_causes_) + where);
        if (r.treatment != 0 && r.treatment != 1) throw InputError("treatment must be 0 or 1" + where);
        if (r.covariates.size() != dim_) throw InputError("covariate length mismatch" + where);
        for (double x : r.covariates)
            if (!std::isfinite(x)) throw InputError("non-finite covariate" + where);
    }
}

std::size_t Dataset::treated_count() const {
    return static_cast<std::size_t>(
        std::count_if(records_.begin(), records_.end(), [](const auto& r) { return r.treatment == 1; }));
}

Eigen::VectorXd Dataset::treatment_vector() const {
    Eigen::VectorXd a(size());
    for (std::size_t i = 0; i < size(); ++i) a[i] = records_[i].treatment;
    return a;
}

Eigen::MatrixXd Dataset::covariate_matrix() const {
    Eigen::MatrixXd x(size(), dim_);
    for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t j = 0; j < dim_; ++j) x(i, j) = records_[i].covariates[j];
    return x;
}

std::vector<double> Dataset::times() const {
    std::vector<double> t(size());
    for (std::size_t i = 0; i < size(); ++i) t[i] = records_[i].time;
    return t;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    std::vector<ObservedRecord> rows;
    rows.reserve(indices.size());
    for (auto i : indices) rows.push_back(records_.at(i));
    return Dataset(std::move(rows), num_causes_);
}

Dataset Dataset::without(std::size_t index) const {
    std::vector<ObservedRecord> rows;
    rows.reserve(size() - 1);
    for (std::size_t i = 0; i < size(); ++i)
        if (i != index) rows.push_back(records_[i]);
    return Dataset(std::move(rows), num_causes_);
}

void Dataset::require_both_arms() const {
    const auto n1 = treated_count();
    if (n1 == 0) throw InputError("treated arm is empty");
    if (n1 == size()) throw InputError("control arm is empty");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

template <typename T>
T parse_cell(const std::string& cell, std::size_t line_no, const std::string& column) {
    T value{};
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw InputError("line " + std::to_string(line_no) + ": cannot parse column '" + column +
                         "' value '" + cell + "'");
    return value;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in, int num_causes) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") != std::string::npos) {
            header = split_csv_line(line);
            break;
        }
    }
    if (header.size() < 4 || header[0] != "id" || header[1] != "time" || header[2] != "status" ||
        header[3] != "treatment")
        throw InputError("line " + std::to_string(line_no) +
                         ": header must start with id,time,status,treatment");
    const std::size_t p = header.size() - 4;
    for (std::size_t j = 0; j < p; ++j)
        if (header[4 + j] != "x" + std::to_string(j + 1))
            throw InputError("line " + std::to_string(line_no) + ": expected column x" +
                             std::to_string(j + 1) + ", found '" + header[4 + j] + "'");

    std::vector<ObservedRecord> rows;
    int max_status = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw InputError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, found " +
                             std::to_string(cells.size()));
        ObservedRecord r;
        r.time = parse_cell<double>(cells[1], line_no, "time");
        r.status = parse_cell<int>(cells[2], line_no, "status");
        r.treatment = parse_cell<int>(cells[3], line_no, "treatment");
        r.covariates.resize(p);
        for (std::size_t j = 0; j < p; ++j) r.covariates[j] = parse_cell<double>(cells[4 + j], line_no, header[4 + j]);
        if (!(r.time > 0.0)) throw InputError("line " + std::to_string(line_no) + ": time must be positive");
        if (r.status < 0) throw InputError("line " + std::to_string(line_no) + ": negative status");
        if (r.treatment != 0 && r.treatment != 1)
            throw InputError("line " + std::to_string(line_no) + ": treatment must be 0 or 1");
        if (num_causes > 0 && r.status > num_causes)
            throw InputError("line " + std::to_string(line_no) + ": status exceeds number of causes");
        max_status = std::max(max_status, r.status);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw InputError("dataset has no data rows");
    return Dataset(std::move(rows), num_causes > 0 ? num_causes : std::max(1, max_status));
}

Dataset read_dataset_csv_file(const std::string& path, int num_causes) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return read_dataset_csv(in, num_causes);
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
    out << "id,time,status,treatment";
    for (std::size_t j = 0; j < data.covariate_dim(); ++j) out << ",x" << j + 1;
    out << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& r = data[i];
        out << i + 1 << ',' << format_double(r.time) << ',' << r.status << ',' << r.treatment;
        for (double x : r.covariates) out << ',' << format_double(x);
        out << '\n';
    }
}

}  // namespace mrcr
