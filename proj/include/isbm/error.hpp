#pragma once

#include <stdexcept>
#include <string>

namespace isbm {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Two paths that must share a grid do not.
class GridMismatch : public Error {
public:
    using Error::Error;
};

/// A local-time level is below the resolution floor of the grid.
class CalibrationError : public Error {
public:
    CalibrationError(const std::string& what, double eps, double floor)
        : Error(what), eps_(eps), floor_(floor) {}
    double eps() const noexcept { return eps_; }
    double floor() const noexcept { return floor_; }

private:
    double eps_;
    double floor_;
};

/// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double estimate, double error_estimate)
        : Error(what), estimate_(estimate), error_estimate_(error_estimate) {}
    double estimate() const noexcept { return estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double estimate_;
    double error_estimate_;
};

}  // namespace isbm
