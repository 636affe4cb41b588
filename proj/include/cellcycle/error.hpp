#pragma once

#include <stdexcept>
#include <string>

namespace cellcycle {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A coefficient or model failed validation (negative rate, bad parameter).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Two models or specs cannot be combined (mismatched phases, period, sparsity).
class StructuralError : public Error {
public:
    using Error::Error;
};

/// The population died out on the grid or all births vanish.
class DegenerateModelError : public Error {
public:
    using Error::Error;
};

/// NaN/inf in a density, or a truncation spill above the strict limit.
class SolverError : public Error {
public:
    using Error::Error;
};

class UnsupportedModelError : public Error {
public:
    using Error::Error;
};

/// An iterative method did not converge within its budget (strict mode).
class ConvergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace cellcycle
