// SPDX-License-Identifier: Apache-2.0
#include "convex.hpp"

#include <cmath>
#include <limits>

namespace tailrisk::convex {
namespace {

void require_probability(double p, const char* who) {
    if (!(p >= 0.0 && p <= 1.0))
        throw DomainError(std::string(who) + ": probability outside [0,1]");
}

constexpr int kMaxIterations = 200;
constexpr double kSlopeTolerance = 1e-12;

}  // namespace

ExtReal hbar(double p, double x) {
    require_probability(p, "hbar");
    if (!(x >= 0.0 && x <= 1.0)) return ExtReal::infinity();
    if (x == p) return 0.0;
    if (x == 1.0) return p > 0.0 ? ExtReal(-std::log(p)) : ExtReal::infinity();
    if (x == 0.0) return p < 1.0 ? ExtReal(-std::log1p(-p)) : ExtReal::infinity();
    if (p == 0.0 || p == 1.0) return ExtReal::infinity();
    const double v = x * std::log(x / p) + (1.0 - x) * std::log((1.0 - x) / (1.0 - p));
    // Rounding can push the value a hair below zero near x = p.
    return v > 0.0 ? v : 0.0;
}

double hbar_prime(double p, double x) {
    if (!(p > 0.0 && p < 1.0) || !(x > 0.0 && x < 1.0))
        throw DomainError("hbar_prime requires p and x strictly inside (0,1)");
    return (std::log(x) - std::log1p(-x)) - (std::log(p) - std::log1p(-p));
}

double lambda_small(double p, double theta) {
    require_probability(p, "lambda_small");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return theta;
    if (theta > 0.0) return theta + std::log(p + (1.0 - p) * std::exp(-theta));
    return std::log1p(p * std::expm1(theta));
}

double lambda_small_prime(double p, double theta) {
    require_probability(p, "lambda_small_prime");
    if (p == 0.0 || p == 1.0) return p;
    if (theta > 0.0) return p / (p + (1.0 - p) * std::exp(-theta));
    const double t = p * std::exp(theta);
    return t / (t + 1.0 - p);
}

ScalarFunction bernoulli_log_mgf(double p) {
    require_probability(p, "bernoulli_log_mgf");
    return [p](double theta) {
        const double q = lambda_small_prime(p, theta);
        return Derivatives{lambda_small(p, theta), q, q * (1.0 - q)};
    };
}

LegendrePoint legendre_point(const ScalarFunction& f, double x, Interval bracket, double guess) {
    if (!(bracket.lo < bracket.hi)) throw DomainError("legendre_1d: empty bracket");
    if (std::isnan(x)) throw DomainError("legendre_1d: x is NaN");

    auto finish = [x](double theta, const Derivatives& d, bool boundary) {
        return LegendrePoint{ExtReal(theta * x - d.value), theta, boundary};
    };

    double theta = std::min(std::max(guess, bracket.lo), bracket.hi);
    Derivatives d = f(theta);
    double resid = d.slope - x;
    if (std::abs(resid) <= kSlopeTolerance) return finish(theta, d, false);

    // Walk outward from the guess until f' - x changes sign.
    double lo, hi;
    Derivatives dlo, dhi;
    {
        const double dir = resid < 0.0 ? 1.0 : -1.0;
        const double edge = dir > 0.0 ? bracket.hi : bracket.lo;
        double prev = theta;
        Derivatives dprev = d;
        double step = 1.0;
        for (;;) {
            double next = prev + dir * step;
            if ((dir > 0.0 && next >= edge) || (dir < 0.0 && next <= edge)) next = edge;
            const Derivatives dnext = f(next);
            const double r = dnext.slope - x;
            if (std::abs(r) <= kSlopeTolerance) return finish(next, dnext, next == edge);
            if ((dir > 0.0 && r > 0.0) || (dir < 0.0 && r < 0.0)) {
                if (dir > 0.0) { lo = prev; dlo = dprev; hi = next; dhi = dnext; }
                else           { lo = next; dlo = dnext; hi = prev; dhi = dprev; }
                break;
            }
            if (next == edge) return {ExtReal::infinity(), edge, true};
            prev = next;
            dprev = dnext;
            step *= 2.0;
        }
    }

    // Safeguarded Newton on f'(theta) = x inside [lo, hi].
    theta = std::abs(dlo.slope - x) < std::abs(dhi.slope - x) ? lo : hi;
    d = theta == lo ? dlo : dhi;
    for (int it = 0; it < kMaxIterations; ++it) {
        resid = d.slope - x;
        if (std::abs(resid) <= kSlopeTolerance) return finish(theta, d, false);
        if (resid < 0.0) lo = theta; else hi = theta;
        const double width = hi - lo;
        if (width <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(theta)))
            return finish(theta, d, false);

        double next = std::numeric_limits<double>::quiet_NaN();
        if (std::isfinite(d.curvature) && d.curvature > 0.0) next = theta - resid / d.curvature;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        theta = next;
        d = f(theta);
    }
    throw NumericalFailure("legendre_1d: no convergence within 200 iterations", lo, hi);
}

}  // namespace tailrisk::convex
