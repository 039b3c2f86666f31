// SPDX-License-Identifier: Apache-2.0
#include "rate_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "convex.hpp"
#include "errors.hpp"
#include "parallel.hpp"

namespace tailrisk::rate {
namespace {

using convex::Derivatives;
using pool::PoolSpec;

constexpr double kEpsD = 1e-4;
constexpr int kScanPoints = 200;
constexpr double kLambda1Limit = 700.0;
constexpr double kLambda2Limit = 1e4;
constexpr double kConstraintTol = 1e-12;
constexpr int kMaxIterations = 200;
constexpr double kNearMinimum = 1e-6;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double pool_max_loss(const PoolSpec& spec) {
    double total = 0.0;
    for (const auto& t : spec.types())
        if (t.p > 0.0) total += t.weight * t.recovery.support(1.0).alpha_plus;
    return total;
}

// Types all point masses with one common loss value; returns it or NaN.
double common_point_loss(const PoolSpec& spec) {
    if (!spec.all_point_mass()) return kNaN;
    const double a = spec[0].recovery.support(0.0).alpha_minus;
    for (const auto& t : spec.types())
        if (std::abs(t.recovery.support(0.0).alpha_minus - a) > 1e-12) return kNaN;
    return a;
}

struct Lambda2Solution {
    double lambda2;
    std::vector<double> phi;
};

// Solves sum_k w_k lambda'_{p_k}(lambda2 + shift_k) = D for lambda2. The
// left side increases in lambda2 from sum_{p=1} w to sum_{p>0} w, so the
// root is unique when D lies strictly between.
Lambda2Solution solve_lambda2(const PoolSpec& spec, std::span<const double> shift, double d, double guess) {
    const std::size_t n = spec.size();
    Lambda2Solution sol{guess, std::vector<double>(n)};
    auto eval = [&](double l2, double& slope) {
        double sum = 0.0;
        slope = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double q = convex::lambda_small_prime(spec[k].p, l2 + shift[k]);
            sol.phi[k] = q;
            sum += spec[k].weight * q;
            slope += spec[k].weight * q * (1.0 - q);
        }
        return sum - d;
    };

    double slope = 0.0;
    double x = std::clamp(guess, -kLambda2Limit, kLambda2Limit);
    double r = eval(x, slope);
    if (std::abs(r) <= kConstraintTol * 1e-2) return sol.lambda2 = x, sol;

    double lo, hi;
    {
        const double dir = r < 0.0 ? 1.0 : -1.0;
        double prev = x, step = 1.0;
        for (;;) {
            double next = std::clamp(prev + dir * step, -kLambda2Limit, kLambda2Limit);
            double s;
            const double rn = eval(next, s);
            if ((dir > 0.0 && rn >= 0.0) || (dir < 0.0 && rn <= 0.0)) {
                lo = std::min(prev, next);
                hi = std::max(prev, next);
                break;
            }
            if (std::abs(next) >= kLambda2Limit) throw Infeasible("default-rate constraint unreachable");
            prev = next;
            step *= 2.0;
        }
    }
    x = 0.5 * (lo + hi);
    for (int it = 0; it < kMaxIterations; ++it) {
        r = eval(x, slope);
        if (std::abs(r) <= kConstraintTol * 1e-2) return sol.lambda2 = x, sol;
        if (r < 0.0) lo = x; else hi = x;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
            return sol.lambda2 = x, sol;
        double next = slope > 0.0 ? x - r / slope : kNaN;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        x = next;
    }
    throw NumericalFailure("lambda2 solve did not converge", lo, hi);
}

// Profile of the dual along the D-constraint at fixed lambda1.
struct Profile {
    double lambda1;
    double lambda2;
    std::vector<Derivatives> mgf;
    std::vector<double> phi;
    double residual;   // sum w phi psi - l, increasing in lambda1
    double slope;      // d residual / d lambda1 (Schur complement of the dual Hessian)
};

Profile profile(const PoolSpec& spec, double d, double ell, double lambda1, double lambda2_guess) {
    const std::size_t n = spec.size();
    Profile pr{lambda1, 0.0, std::vector<Derivatives>(n), {}, 0.0, 0.0};
    std::vector<double> shift(n);
    for (std::size_t k = 0; k < n; ++k) {
        pr.mgf[k] = spec[k].recovery.log_mgf_derivatives(lambda1, d);
        shift[k] = pr.mgf[k].value;
    }
    auto l2 = solve_lambda2(spec, shift, d, lambda2_guess);
    pr.lambda2 = l2.lambda2;
    pr.phi = std::move(l2.phi);

    double loss = 0.0, a = 0.0, b = 0.0, c = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = spec[k].weight, q = pr.phi[k], psi = pr.mgf[k].slope;
        loss += w * q * psi;
        const double v = w * q * (1.0 - q);
        a += v * psi * psi + w * q * pr.mgf[k].curvature;
        b += v * psi;
        c += v;
    }
    pr.residual = loss - ell;
    pr.slope = c > 0.0 ? std::max(0.0, a - b * b / c) : std::max(0.0, a);
    return pr;
}

Multipliers finish(const PoolSpec& spec, const Profile& pr) {
    Multipliers m;
    m.lambda1 = pr.lambda1;
    m.lambda2 = pr.lambda2;
    m.phi = pr.phi;
    m.psi.resize(spec.size());
    double value = 0.0;
    for (std::size_t k = 0; k < spec.size(); ++k) {
        m.psi[k] = pr.mgf[k].slope;
        // I_k(psi_k) = lambda1 psi_k - M_k(lambda1) at psi_k = M_k'(lambda1).
        const double rate_term = pr.lambda1 * m.psi[k] - pr.mgf[k].value;
        const ExtReal h = convex::hbar(spec[k].p, m.phi[k]);
        if (h.is_infinite()) throw Infeasible("tilted default probability incompatible with p");
        value += spec[k].weight * (m.phi[k] * std::max(0.0, rate_term) + h.value());
    }
    m.value = value;
    return m;
}

RatePoint infinite_point(const PoolSpec& spec, double ell) {
    RatePoint pt;
    pt.ell = ell;
    pt.rate = ExtReal::infinity();
    pt.d_star = pt.r_star = pt.lambda1 = pt.lambda2 = kNaN;
    pt.phi.assign(spec.size(), kNaN);
    pt.psi.assign(spec.size(), kNaN);
    return pt;
}

RatePoint from_multipliers(const PoolSpec& spec, double ell, double d, const Multipliers& m) {
    RatePoint pt;
    pt.ell = ell;
    pt.rate = m.value;
    pt.d_star = d;
    pt.r_star = 1.0 - ell / d;
    pt.lambda1 = m.lambda1;
    pt.lambda2 = m.lambda2;
    pt.phi = m.phi;
    pt.psi = m.psi;
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const double p = spec[k].p;
        if (p > 0.0 && p < 1.0 && (m.phi[k] < 1e-12 || m.phi[k] > 1.0 - 1e-12)) pt.boundary_active = true;
    }
    if (std::abs(m.lambda1) >= kLambda1Limit * (1.0 - 1e-12)) pt.boundary_active = true;
    return pt;
}

RatePoint typical_point(const PoolSpec& spec, const pool::LlnSummary& s) {
    Multipliers m;
    for (const auto& t : spec.types()) {
        m.phi.push_back(t.p);
        m.psi.push_back(t.recovery.mean_loss(s.d_bar));
    }
    m.value = 0.0;
    RatePoint pt = from_multipliers(spec, s.l_bar, s.d_bar, m);
    if (s.d_bar == 0.0) pt.r_star = kNaN;
    return pt;
}

// Pools whose names all lose the same fixed fraction a: D = l / a is forced
// and only the default-count entropy remains.
RatePoint point_mass_closed_form(const PoolSpec& spec, double ell, double a) {
    const std::size_t n = spec.size();
    if (a <= 0.0) {
        if (ell > 0.0) return infinite_point(spec, ell);
        return typical_point(spec, pool::lln(spec));
    }
    double d = ell / a;
    if (d > 1.0 + 1e-12) return infinite_point(spec, ell);
    d = std::min(d, 1.0);

    Multipliers m;
    m.psi.assign(n, a);
    const bool common_p = std::all_of(spec.types().begin(), spec.types().end(),
                                      [&](const pool::TypeSpec& t) { return t.p == spec[0].p; });
    if (common_p || d == 0.0 || d == 1.0) {
        m.phi.assign(n, d);
        const double p = spec[0].p;
        m.lambda2 = (common_p && p > 0.0 && p < 1.0 && d > 0.0 && d < 1.0) ? convex::hbar_prime(p, d) : kNaN;
    } else {
        std::vector<double> zero(n, 0.0);
        try {
            auto sol = solve_lambda2(spec, zero, d, 0.0);
            m.phi = std::move(sol.phi);
            m.lambda2 = sol.lambda2;
        } catch (const Infeasible&) {
            return infinite_point(spec, ell);
        }
    }
    ExtReal value = 0.0;
    for (std::size_t k = 0; k < n; ++k) value += scale(spec[k].weight, convex::hbar(spec[k].p, m.phi[k]));
    if (value.is_infinite()) return infinite_point(spec, ell);
    m.value = value.value();
    m.lambda1 = 0.0;
    return from_multipliers(spec, ell, d, m);
}

struct Evaluation {
    double value = std::numeric_limits<double>::infinity();
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

Evaluation evaluate(const PoolSpec& spec, double d, double ell, double lambda1_guess) {
    try {
        const auto m = solve_multipliers(spec, d, ell, lambda1_guess);
        return {m.value, m.lambda1, m.lambda2};
    } catch (const Infeasible&) {
        return {std::numeric_limits<double>::infinity(), lambda1_guess, 0.0};
    } catch (const NumericalFailure& e) {
        std::ostringstream os;
        os << e.what() << " (at D = " << d << ")";
        throw NumericalFailure(os.str(), e.bracket_lo(), e.bracket_hi());
    }
}

}  // namespace

ExtReal inner_value(const PoolSpec& spec, double default_rate, std::span<const double> phi,
                    std::span<const double> psi) {
    if (phi.size() != spec.size() || psi.size() != spec.size())
        throw DomainError("inner_value: phi/psi length must equal the number of types");
    if (!(default_rate >= 0.0 && default_rate <= 1.0)) throw DomainError("inner_value: D outside [0,1]");
    ExtReal total = 0.0;
    for (std::size_t k = 0; k < spec.size(); ++k) {
        if (!(phi[k] >= 0.0 && phi[k] <= 1.0) || !(psi[k] >= 0.0 && psi[k] <= 1.0))
            throw DomainError("inner_value: phi and psi must lie in [0,1]");
        const double w = spec[k].weight;
        total += scale(w, convex::hbar(spec[k].p, phi[k]));
        if (phi[k] > 0.0) total += scale(w * phi[k], spec[k].recovery.loss_rate_function(psi[k], default_rate));
    }
    return total;
}

Multipliers solve_multipliers(const PoolSpec& spec, double default_rate, double ell, double lambda1_guess) {
    const double d = default_rate;
    if (!(ell >= 0.0 && d >= ell && d <= 1.0)) throw DomainError("solve_multipliers requires 0 <= l <= D <= 1");

    double x = std::clamp(lambda1_guess, -kLambda1Limit, kLambda1Limit);
    Profile pr = profile(spec, d, ell, x, 0.0);
    if (std::abs(pr.residual) <= kConstraintTol) return finish(spec, pr);

    // Bracket the root of the increasing residual, then safeguarded Newton.
    double lo, hi;
    Profile plo = pr, phi = pr;
    {
        const double dir = pr.residual < 0.0 ? 1.0 : -1.0;
        double step = 1.0;
        Profile prev = pr;
        for (;;) {
            const double next_x = std::clamp(prev.lambda1 + dir * step, -kLambda1Limit, kLambda1Limit);
            Profile next = profile(spec, d, ell, next_x, prev.lambda2);
            if (std::abs(next.residual) <= kConstraintTol) return finish(spec, next);
            if ((dir > 0.0) == (next.residual > 0.0)) {
                if (dir > 0.0) { plo = prev; phi = next; } else { plo = next; phi = prev; }
                break;
            }
            if (std::abs(next_x) >= kLambda1Limit) throw Infeasible("loss constraint unreachable at this default rate");
            prev = std::move(next);
            step *= 2.0;
        }
        lo = plo.lambda1;
        hi = phi.lambda1;
    }

    pr = std::abs(plo.residual) < std::abs(phi.residual) ? plo : phi;
    for (int it = 0; it < kMaxIterations; ++it) {
        if (std::abs(pr.residual) <= kConstraintTol) return finish(spec, pr);
        if (pr.residual < 0.0) lo = pr.lambda1; else hi = pr.lambda1;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(pr.lambda1)))
            return finish(spec, pr);
        double next = pr.slope > 0.0 ? pr.lambda1 - pr.residual / pr.slope : kNaN;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        pr = profile(spec, d, ell, next, pr.lambda2);
    }
    throw NumericalFailure("multiplier solve did not converge", lo, hi);
}

RatePoint rate_at(const PoolSpec& spec, double ell, double lambda1_guess) {
    if (!(ell >= 0.0 && ell <= 1.0)) throw DomainError("rate_at: loss level outside [0,1]");
    const auto summary = pool::lln(spec);
    if (std::abs(ell - summary.l_bar) <= 1e-15) {
        auto pt = typical_point(spec, summary);
        pt.ell = ell;
        return pt;
    }
    if (ell > pool_max_loss(spec) + 1e-15) return infinite_point(spec, ell);
    if (const double a = common_point_loss(spec); !std::isnan(a)) return point_mass_closed_form(spec, ell, a);

    double d_min = 0.0, d_max = 0.0;
    for (const auto& t : spec.types()) {
        if (t.p == 1.0) d_min += t.weight;
        if (t.p > 0.0) d_max += t.weight;
    }
    const double lo = std::max({ell, kEpsD, d_min});
    const double hi = std::min(1.0 - kEpsD, d_max);

    // Zero loss with no defaults at all is always available.
    std::optional<RatePoint> zero_loss;
    if (ell == 0.0) {
        Multipliers m;
        ExtReal v = 0.0;
        for (const auto& t : spec.types()) {
            m.phi.push_back(t.p == 1.0 ? 1.0 : 0.0);
            m.psi.push_back(t.recovery.support(0.0).alpha_minus);
            v += scale(t.weight, convex::hbar(t.p, m.phi.back()));
        }
        if (v.is_finite()) {
            m.value = v.value();
            m.lambda1 = m.lambda2 = kNaN;
            zero_loss = from_multipliers(spec, 0.0, d_min, m);
            zero_loss->r_star = kNaN;
        }
    }
    if (!(lo < hi)) return zero_loss ? *zero_loss : infinite_point(spec, ell);

    std::vector<double> grid(kScanPoints), values(kScanPoints);
    std::vector<double> lambdas(kScanPoints);
    double guess = lambda1_guess;
    for (int j = 0; j < kScanPoints; ++j) {
        grid[j] = lo + (hi - lo) * j / (kScanPoints - 1);
        const auto e = evaluate(spec, grid[j], ell, guess);
        values[j] = e.value;
        lambdas[j] = e.lambda1;
        if (std::isfinite(e.value)) guess = e.lambda1;
    }
    const auto best_it = std::min_element(values.begin(), values.end());
    if (!std::isfinite(*best_it)) return zero_loss ? *zero_loss : infinite_point(spec, ell);
    const int best = static_cast<int>(best_it - values.begin());

    // Golden section on the cell around the best scan point.
    double a = grid[std::max(0, best - 1)];
    double b = grid[std::min(kScanPoints - 1, best + 1)];
    guess = lambdas[best];
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = evaluate(spec, x1, ell, guess).value, f2 = evaluate(spec, x2, ell, guess).value;
    while (b - a > 1e-11 * std::max(1.0, b)) {
        if (f1 <= f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = evaluate(spec, x1, ell, guess).value;
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = evaluate(spec, x2, ell, guess).value;
        }
    }
    double d_star = f1 <= f2 ? x1 : x2;
    if (std::min(f1, f2) > values[best]) d_star = grid[best];

    Multipliers m;
    try {
        m = solve_multipliers(spec, d_star, ell, guess);
    } catch (const Infeasible&) {
        return zero_loss ? *zero_loss : infinite_point(spec, ell);
    }
    if (zero_loss && zero_loss->rate <= ExtReal(m.value)) return *zero_loss;

    RatePoint pt = from_multipliers(spec, ell, d_star, m);
    for (int j = 0; j < kScanPoints; ++j) {
        if (std::abs(j - best) <= 1 || !std::isfinite(values[j])) continue;
        const bool local_min = (j == 0 || values[j] <= values[j - 1]) &&
                               (j == kScanPoints - 1 || values[j] <= values[j + 1]);
        if (local_min && values[j] - m.value <= kNearMinimum) pt.near_minima.push_back(grid[j]);
    }
    return pt;
}

RateCurve rate_curve(const PoolSpec& spec, std::span<const double> ell_grid, bool warm_start) {
    for (std::size_t i = 1; i < ell_grid.size(); ++i)
        if (!(ell_grid[i] > ell_grid[i - 1])) throw DomainError("rate_curve: grid must be strictly increasing");

    RateCurve curve{spec, std::vector<RatePoint>(ell_grid.size())};
    auto solve_one = [&](std::size_t i, double guess) {
        try {
            curve.points[i] = rate_at(spec, ell_grid[i], guess);
        } catch (const std::exception& e) {
            RatePoint pt = infinite_point(spec, ell_grid[i]);
            pt.ok = false;
            pt.message = e.what();
            curve.points[i] = std::move(pt);
        }
    };
    if (warm_start) {
        double guess = 0.0;
        for (std::size_t i = 0; i < ell_grid.size(); ++i) {
            solve_one(i, guess);
            const auto& pt = curve.points[i];
            if (pt.ok && pt.rate.is_finite() && std::isfinite(pt.lambda1)) guess = pt.lambda1;
        }
    } else {
        parallel::for_each_index(ell_grid.size(), [&](std::size_t i) { solve_one(i, 0.0); });
    }
    return curve;
}

std::vector<RecoveryPoint> effective_recovery_curve(const RateCurve& curve) {
    std::vector<RecoveryPoint> out;
    for (const auto& pt : curve.points)
        if (pt.ok && pt.rate.is_finite() && std::isfinite(pt.d_star) && pt.d_star > 0.0)
            out.push_back({pt.d_star, 1.0 - pt.ell / pt.d_star, pt.ell});
    std::stable_sort(out.begin(), out.end(),
                     [](const RecoveryPoint& a, const RecoveryPoint& b) { return a.d_star < b.d_star; });
    return out;
}

}  // namespace tailrisk::rate
