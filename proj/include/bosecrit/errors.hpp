#pragma once

#include <stdexcept>
#include <string>

namespace bosecrit {

// Invalid numeric arguments (nonpositive variance, negative time, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Malformed symbolic input: wrong factor pattern, missing variable, bad labels.
struct StructuralError : std::logic_error {
    using std::logic_error::logic_error;
};

// Bad run parameters (grid too small, dt too coarse, unknown config keys).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Iterative method failed to reach its tolerance.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested discretization exceeds the memory guard.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation called outside its regime (supercritical input to a subcritical routine, ...).
struct PreconditionError : std::logic_error {
    using std::logic_error::logic_error;
};

void require_positive(double x, const char* what);

}  // namespace bosecrit
