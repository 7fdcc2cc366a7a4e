#pragma once

#include <stdexcept>
#include <string>

namespace birg {

// Invalid (M, N, d_b, d_w) or malformed run specification. CLI exit code 2.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EdgeCountMismatch : ConfigError {
    using ConfigError::ConfigError;
};

struct OrientationError : ConfigError {
    using ConfigError::ConfigError;
};

struct InfeasibleDegree : ConfigError {
    using ConfigError::ConfigError;
};

// Numeric failure in an eigensolver, quadrature or root selection. CLI exit code 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceFailure : NumericError {
    using NumericError::NumericError;
};

struct PoleProximity : NumericError {
    using NumericError::NumericError;
};

struct BranchAmbiguity : NumericError {
    using NumericError::NumericError;
};

struct QuadratureFailure : NumericError {
    using NumericError::NumericError;
};

// A requested exhaustive computation exceeds its size guard. CLI exit code 4.
struct TooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Graph too small to host a three-edge rewiring proposal.
struct DegenerateGraph : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace birg
