#pragma once

#include <stdexcept>
#include <string>

namespace sqtom {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments, malformed files, schema violations. CLI exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

// Singular matrices, degenerate chains, non-finite results. CLI exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Convergence gate failures (R-hat >= 1.1). CLI exit code 4.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace sqtom
