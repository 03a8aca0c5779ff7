#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mrcr {

// One subject: observed time min(T, C), observed cause (0 = censored),
// binary treatment and baseline covariates.
struct ObservedRecord {
    double time = 0.0;
    int status = 0;
    int treatment = 0;
    std::vector<double> covariates;

    bool is_failure() const { return status > 0; }
};

class Dataset {
public:
    Dataset() = default;

    // Validates every record; throws InputError on violation.
    Dataset(std::vector<ObservedRecord> records, int num_causes);

    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    int num_causes() const { return num_causes_; }
    std::size_t covariate_dim() const { return dim_; }

    const ObservedRecord& operator[](std::size_t i) const { return records_[i]; }
    const std::vector<ObservedRecord>& records() const { return records_; }

    std::size_t treated_count() const;
    std::size_t control_count() const { return size() - treated_count(); }

    Eigen::VectorXd treatment_vector() const;
    Eigen::MatrixXd covariate_matrix() const;
    std::vector<double> times() const;

    // Rows drawn by index (with repetition allowed); used by the bootstrap.
    Dataset subset(std::span<const std::size_t> indices) const;
    Dataset without(std::size_t index) const;

    // Throws InputError unless both arms are nonempty.
    void require_both_arms() const;

private:
    std::vector<ObservedRecord> records_;
    int num_causes_ = 1;
    std::size_t dim_ = 0;
};

// CSV schema: id,time,status,treatment,x1,...,xp
// num_causes <= 0 infers K from the largest observed status (at least 1).
Dataset read_dataset_csv(std::istream& in, int num_causes = 0);
Dataset read_dataset_csv_file(const std::string& path, int num_causes = 0);
void write_dataset_csv(std::ostream& out, const Dataset& data);

// Formats a double with 17 significant digits.
std::string format_double(double value);

}  // namespace mrcr
