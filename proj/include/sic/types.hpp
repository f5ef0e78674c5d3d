// types.hpp
// Common error types and small shared aliases for the sic library.

#pragma once

#include <stdexcept>
#include <string>

namespace sic {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed, inconsistent or degenerate input data (bad CSV, zero-variance
/// rows, misaligned panels, infeasible cluster counts).
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

/// Numerical failure (singular factorization, non-convergent iteration,
/// degenerate optimization input).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

} // namespace sic
