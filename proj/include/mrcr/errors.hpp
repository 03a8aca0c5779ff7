#pragma once

#include <stdexcept>
#include <string>

namespace mrcr {

// Bad user input: malformed files, invalid arguments, violated preconditions.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical procedure could not produce a valid answer for valid input.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateRiskSetError : public NumericError {
public:
    DegenerateRiskSetError(const std::string& what, double time)
        : NumericError(what), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

class CollinearityError : public NumericError {
public:
    using NumericError::NumericError;
};

class ConvergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

class InfeasibleError : public NumericError {
public:
    InfeasibleError(const std::string& what, int constraint)
        : NumericError(what), constraint_(constraint) {}
    // Index of the offending calibration constraint (column of the stacked matrix).
    int constraint() const { return constraint_; }

private:
    int constraint_;
};

class PositivityError : public NumericError {
public:
    using NumericError::NumericError;
};

class CalibrationError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace mrcr
