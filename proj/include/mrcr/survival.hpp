#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mrcr/dataset.hpp"
#include "mrcr/step_function.hpp"

namespace mrcr {

// n x h matrix of jackknife pseudo-values of the cause-specific CIF.
// Row i follows the record order of the input dataset.
struct PseudoValueMatrix {
    Eigen::MatrixXd values;
    std::vector<double> time_grid;
    int cause = 1;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    Eigen::VectorXd column(std::size_t j) const { return values.col(static_cast<Eigen::Index>(j)); }
};

// Product-limit estimate of the censoring survival G(t). At tied times failures
// leave the risk set before censorings are counted.
StepFunction km_censoring_survival(const Dataset& data);

// F_k(t) = n^-1 sum_i int_0^t dN_ik(s) / G(s-), closed at t.
StepFunction ipcw_cif(const Dataset& data, int cause);

// Incremental leave-one-out algorithm, O(n log n + n h).
PseudoValueMatrix jackknife_pseudovalues(const Dataset& data, int cause, std::span<const double> time_grid);

// Recomputes G and F_k on each of the n leave-one-out samples. O(n^2 log n);
// kept as the reference for the incremental path.
PseudoValueMatrix jackknife_pseudovalues_bruteforce(const Dataset& data, int cause,
                                                    std::span<const double> time_grid);

// Type-7 empirical quantile of an unsorted sample.
double quantile_type7(std::vector<double> sample, double prob);

// Percentile grid (10/30/50/70/90%) of observed failure times of a cause.
std::vector<double> default_time_grid(const Dataset& data, int cause);

}  // namespace mrcr
