#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace safe_rl {

/// Malformed arguments: dimension mismatches, out-of-range ids.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A one-vs-rest subproblem with an empty positive or negative side.
class DegenerateClass : public std::domain_error {
public:
    DegenerateClass(std::size_t n_pos, std::size_t n_neg)
        : std::domain_error("degenerate binary problem: N+=" + std::to_string(n_pos) +
                            " N-=" + std::to_string(n_neg)),
          n_pos(n_pos), n_neg(n_neg) {}
    std::size_t n_pos;
    std::size_t n_neg;
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(double residual, std::size_t iterations)
        : std::runtime_error("QP solver did not converge: KKT residual " +
                             std::to_string(residual) + " after " +
                             std::to_string(iterations) + " iterations"),
          residual(residual), iterations(iterations) {}
    double residual;
    std::size_t iterations;
};

class NoSupportVectors : public std::domain_error {
public:
    NoSupportVectors() : std::domain_error("all multipliers are zero; offset undefined") {}
};

/// A safe, non-terminal state with no safe successor.
class EmptySafeSet : public std::runtime_error {
public:
    explicit EmptySafeSet(std::size_t state)
        : std::runtime_error("empty safe action set at state " + std::to_string(state)),
          state(state) {}
    std::size_t state;
};

class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Raised when a visited state violates a constraint. Under a correct
/// implementation this never fires.
class SafetyViolation : public std::logic_error {
public:
    explicit SafetyViolation(std::size_t state)
        : std::logic_error("constraint violated at state " + std::to_string(state)),
          state(state) {}
    std::size_t state;
};

/// Environment / configuration file problems. `where` names the field or
/// line:column of the offending input.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string where, const std::string& what)
        : std::runtime_error(where + ": " + what), where(std::move(where)) {}
    std::string where;
};

}  // namespace safe_rl
