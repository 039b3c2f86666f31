// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "ext_real.hpp"

/// Bernoulli relative entropy, its convex dual, and 1-D Legendre-Fenchel
/// transforms. Every function here is pure.
namespace tailrisk::convex {

/// Relative entropy of Bernoulli(x) with respect to Bernoulli(p), using
/// 0 ln 0 = 0. +inf outside [0,1] and wherever x is not absolutely
/// continuous with respect to p. Throws DomainError if p is not in [0,1].
ExtReal hbar(double p, double x);

/// d/dx hbar(p, x) = ln(x(1-p) / ((1-x)p)); requires p, x in (0,1).
double hbar_prime(double p, double x);

/// Log-MGF of a Bernoulli(p): ln(p e^theta + 1 - p), overflow-free.
double lambda_small(double p, double theta);

/// Derivative of lambda_small in theta: the exponentially tilted default
/// probability p e^theta / (p e^theta + 1 - p).
double lambda_small_prime(double p, double theta);

/// Value, first and second derivative of a scalar function at one point.
/// `curvature` may be NaN when the caller has no second derivative.
struct Derivatives {
    double value;
    double slope;
    double curvature;
};

using ScalarFunction = std::function<Derivatives(double)>;

struct Interval {
    double lo;
    double hi;
};

/// Result of sup_theta { theta x - f(theta) } together with the maximizer.
struct LegendrePoint {
    ExtReal value;
    double argmax;       // meaningless when value is +inf
    bool at_boundary;    // x matched f' at an end of the admissible bracket
};

/// Default admissible bracket for the transforms in this library.
inline constexpr Interval kDefaultBracket{-700.0, 700.0};

/// Legendre transform of a convex C^1 function at `x`, solving f'(theta) = x
/// by outward bracketing from `guess` followed by safeguarded Newton.
/// Returns +inf when x lies outside the range of f' over `bracket`. Throws
/// NumericalFailure (carrying the last bracket) after 200 iterations.
LegendrePoint legendre_point(const ScalarFunction& f, double x,
                             Interval bracket = kDefaultBracket, double guess = 0.0);

inline ExtReal legendre_1d(const ScalarFunction& f, double x,
                           Interval bracket = kDefaultBracket, double guess = 0.0) {
    return legendre_point(f, x, bracket, guess).value;
}

/// lambda_small(p, .) packaged for legendre_1d.
ScalarFunction bernoulli_log_mgf(double p);

}  // namespace tailrisk::convex
