#pragma once

#include <stdexcept>
#include <string>

namespace asym {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes or tensor factorisations that do not fit together.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An input violates a documented precondition (non-Hermitian, non-unitary,
/// not a state, not covariant, ...). The message carries the measured defect.
class ValidationError : public Error {
public:
    ValidationError(const std::string& what, double measured)
        : Error(what + " (measured " + std::to_string(measured) + ")"), measured_(measured) {}
    explicit ValidationError(const std::string& what) : Error(what) {}

    double measured() const noexcept { return measured_; }

private:
    double measured_ = 0.0;
};

}  // namespace asym
