#pragma once

#include <stdexcept>
#include <string>

namespace sid {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A matrix or sequence has a shape inconsistent with the declared dimensions.
// The message names the offending field.
struct DimensionMismatch : Error {
    using Error::Error;
};

// A matrix required to be symmetric positive definite is not.
struct NotSPD : Error {
    NotSPD(const std::string& which, double min_eig)
        : Error("matrix " + which + " is not SPD (smallest eigenvalue " +
                std::to_string(min_eig) + ")"),
          matrix(which),
          min_eigenvalue(min_eig) {}
    std::string matrix;
    double min_eigenvalue;
};

struct NonPositiveWeight : Error {
    using Error::Error;
};

struct InvalidGrid : Error {
    using Error::Error;
};

struct UnknownKind : Error {
    using Error::Error;
};

// A linear solve hit a non-positive pivot. With validated inputs this signals
// numerical breakdown, not a recoverable condition.
struct SingularSystem : Error {
    using Error::Error;
};

// The outer loop observed J increasing beyond tolerance. The descent identity
// guarantees this cannot happen with exact subproblem solves.
struct DescentViolation : Error {
    using Error::Error;
};

// Malformed or unreadable input file; carries enough context to locate the row.
struct IoError : Error {
    using Error::Error;
};

// Semantically invalid configuration (missing or ill-typed field). The message
// names the field.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace sid
