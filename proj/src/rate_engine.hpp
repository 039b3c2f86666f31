// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "ext_real.hpp"
#include "pool.hpp"

/// Large-deviations rate function of the pool loss rate through its
/// finite-type variational form
///
///   I'(l) = inf_D inf_{phi, psi} sum_k w_k [ phi_k I_k(psi_k, D) + hbar_{p_k}(phi_k) ]
///   s.t.   sum_k w_k phi_k = D,   sum_k w_k phi_k psi_k = l.
///
/// For fixed (D, l) the inner problem is convex and is solved through its
/// Lagrange multipliers: psi_k = M_k'(lambda1, D) and
/// phi_k = lambda'_{p_k}(lambda2 + M_k(lambda1, D)).
namespace tailrisk::rate {

/// Inner-problem solution at fixed (D, l).
struct Multipliers {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::vector<double> phi;
    std::vector<double> psi;
    double value = 0.0;   // inner objective at (phi, psi)
};

/// One point of the rate curve.
struct RatePoint {
    double ell = 0.0;
    ExtReal rate = ExtReal::infinity();
    double d_star = 0.0;   // most likely default rate; NaN when rate is +inf
    double r_star = 0.0;   // 1 - ell / d_star; NaN when rate is +inf
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::vector<double> phi;
    std::vector<double> psi;
    /// Other scan-detected local minima in D whose value is within 1e-6 of
    /// the optimum (non-uniqueness diagnostic).
    std::vector<double> near_minima;
    /// Some tilted default probability sits at 0 or 1, where the
    /// first-order conditions do not apply.
    bool boundary_active = false;
    bool ok = true;
    std::string message;
};

struct RateCurve {
    pool::PoolSpec pool;
    std::vector<RatePoint> points;
};

/// Effective recovery pair (D*(l), R*(l)) for one finite-rate grid point.
struct RecoveryPoint {
    double d_star;
    double r_star;
    double ell;
};

/// Inner objective; phi_k = 0 drops the k-th recovery term (0 * inf = 0).
ExtReal inner_value(const pool::PoolSpec& spec, double default_rate,
                    std::span<const double> phi, std::span<const double> psi);

/// Solves the two constraints for (lambda1, lambda2) to 1e-12. Throws
/// Infeasible if l is not reachable at this D (within |lambda1| <= 700) and
/// DomainError unless 0 <= l <= D <= 1.
Multipliers solve_multipliers(const pool::PoolSpec& spec, double default_rate, double ell,
                              double lambda1_guess = 0.0);

/// I'(l) with its minimizing configuration. The outer infimum over D uses a
/// 200-point scan of [max(l, 1e-4), 1 - 1e-4] refined by golden section.
/// Homogeneous point-mass pools use the closed form hbar(l / (1 - r0)).
RatePoint rate_at(const pool::PoolSpec& spec, double ell, double lambda1_guess = 0.0);

/// rate_at over a sorted grid. Warm starts seed each point's multiplier
/// search with the previous point's lambda1 and run sequentially; cold
/// starts may run grid points in parallel. Per-point failures are recorded
/// in the point (ok = false), never thrown.
RateCurve rate_curve(const pool::PoolSpec& spec, std::span<const double> ell_grid, bool warm_start = true);

/// (D*, R*) pairs of the finite-rate points, sorted by D*.
std::vector<RecoveryPoint> effective_recovery_curve(const RateCurve& curve);

}  // namespace tailrisk::rate
