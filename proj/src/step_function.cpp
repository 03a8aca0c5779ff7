#include "mrcr/step_function.hpp"

#include <algorithm>
#include <cmath>

#include "mrcr/errors.hpp"

namespace mrcr {

StepFunction::StepFunction(double initial, std::vector<double> jump_times, std::vector<double> values)
    : initial_(initial), times_(std::move(jump_times)), values_(std::move(values)) {
    if (times_.size() != values_.size()) throw InputError("step function: times/values length mismatch");
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (!(times_[i] > 0.0)) throw InputError("step function: jump times must be positive");
        if (i > 0 && !(times_[i] > times_[i - 1]))
            throw InputError("step function: jump times must be strictly increasing");
    }
}

double StepFunction::value(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return initial_;
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double StepFunction::value_left(double t) const {
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return initial_;
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

}  // namespace mrcr
