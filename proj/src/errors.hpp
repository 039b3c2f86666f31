// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace tailrisk {

/// Argument outside an operation's mathematical domain.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative solver hit its cap or a sampler exhausted its attempt budget.
class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what, double lo = 0.0, double hi = 0.0)
        : std::runtime_error(what), lo_(lo), hi_(hi) {}

    /// Best bracket (or diagnostic interval) known when the failure occurred.
    double bracket_lo() const noexcept { return lo_; }
    double bracket_hi() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
};

/// No configuration satisfies the constraints of a variational subproblem.
class Infeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed pool configuration; carries the 1-based line when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Importance-sampling estimate has no mass on the event of interest.
class InsufficientSampling : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation not defined for the given pool (e.g. exact tail on a beta pool).
class Unsupported : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace tailrisk
