#pragma once

#include <stdexcept>
#include <string>

namespace specmix {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Incompatible shapes or out-of-range structural arguments (G, p, q, ...).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Malformed or non-finite input data (CSV parse failures, NaN entries, ...).
class DataError : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown: non-positive-definite covariance after regularization,
/// degenerate Durbin-Watson denominator, non-finite likelihood.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A mixture component collapsed (effective count below threshold).
class EmptyComponentError : public Error {
public:
    EmptyComponentError(int component, const std::string& msg)
        : Error(msg), component_(component) {}

    int component() const { return component_; }

private:
    int component_;
};

}  // namespace specmix
