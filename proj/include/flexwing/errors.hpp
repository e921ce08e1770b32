#pragma once

#include <stdexcept>
#include <string>

namespace flexwing {

// Iterative numerics failed to converge or produced an unusable result.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inputs violate a model precondition (singular inertia, indefinite R, ...).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IllConditionedBasisError : std::runtime_error {
    double condition;
    explicit IllConditionedBasisError(double cond)
        : std::runtime_error("combined basis Gram matrix too ill-conditioned for projection "
                             "(condition estimate " + std::to_string(cond) + ")"),
          condition(cond) {}
};

// No stabilizing Riccati solution exists for the given data.
struct NoStabilizingSolutionError : SolverError {
    using SolverError::SolverError;
};

// A policy-iteration step hit a singular left-side operator.
struct IterationError : SolverError {
    using SolverError::SolverError;
};

// A filter/regulator design is structurally impossible (e.g. unobservable mode).
struct DesignError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivergenceError : std::runtime_error {
    long step;
    DivergenceError(long step_index, const std::string& what)
        : std::runtime_error(what), step(step_index) {}
};

struct ConfigError : std::runtime_error {
    int line;
    ConfigError(int line_number, const std::string& what)
        : std::runtime_error(what), line(line_number) {}
};

}  // namespace flexwing
