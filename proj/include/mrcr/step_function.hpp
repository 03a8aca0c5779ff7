#pragma once

#include <span>
#include <vector>

namespace mrcr {

// Right-continuous piecewise-constant function on [0, inf).
// value(t) is the value set by the last jump <= t (initial value before the first jump).
class StepFunction {
public:
    StepFunction() = default;
    explicit StepFunction(double initial) : initial_(initial) {}
    StepFunction(double initial, std::vector<double> jump_times, std::vector<double> values);

    double operator()(double t) const { return value(t); }
    double value(double t) const;
    // Value of the last jump strictly before t.
    double value_left(double t) const;

    double initial() const { return initial_; }
    std::span<const double> jump_times() const { return times_; }
    std::span<const double> values() const { return values_; }

private:
    double initial_ = 0.0;
    std::vector<double> times_;
    std::vector<double> values_;
};

}  // namespace mrcr
