// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string_view>
#include <variant>

#include "convex.hpp"
#include "ext_real.hpp"
#include "rng.hpp"

namespace tailrisk::recovery {

enum class MeanMapKind { Affine, Quadratic, Constant };

std::string_view to_string(MeanMapKind kind);

/// Conditional expected recovery as a function of the pool default rate:
///   m(D) = base - slope (D - anchor) - curvature (D - anchor)^2
/// Affine maps carry no curvature; constant maps carry neither slope nor
/// curvature.
struct MeanMap {
    MeanMapKind kind = MeanMapKind::Constant;
    double base = 0.0;
    double slope = 0.0;
    double curvature = 0.0;
    double anchor = 0.0;

    double operator()(double default_rate) const noexcept {
        const double d = default_rate - anchor;
        return base - slope * d - curvature * d * d;
    }

    static MeanMap constant(double base) { return {MeanMapKind::Constant, base, 0.0, 0.0, 0.0}; }
    static MeanMap affine(double base, double slope, double anchor) {
        return {MeanMapKind::Affine, base, slope, 0.0, anchor};
    }
    static MeanMap quadratic(double base, double slope, double curvature, double anchor) {
        return {MeanMapKind::Quadratic, base, slope, curvature, anchor};
    }

    friend bool operator==(const MeanMap&, const MeanMap&) = default;
};

/// Infimum and supremum of the loss 1 - r over the support of rho(D, .).
struct LossSupport {
    double alpha_minus;
    double alpha_plus;
};

struct PointMass {
    double r0;
    friend bool operator==(const PointMass&, const PointMass&) = default;
};

/// rho(D, .) = law of r where 1 - r has density beta s^(beta-1) on [0,1],
/// beta = 1/m(D) - 1.
struct BetaFamily {
    MeanMap mean_map;
    friend bool operator==(const BetaFamily&, const BetaFamily&) = default;
};

/// A recovery distribution rho(D, .) on [0,1] that depends on the realized
/// default rate D. Immutable after construction.
class RecoveryModel {
public:
    static constexpr std::size_t kDefaultNodes = 64;

    /// Throws DomainError unless 0 <= r0 <= 1.
    static RecoveryModel point_mass(double r0);

    /// Throws DomainError unless m(D) stays inside (0,1) on a 1e-3 grid of
    /// [0,1] and the map's coefficients match its kind.
    static RecoveryModel beta(const MeanMap& mean_map, std::size_t nodes = kDefaultNodes);

    bool is_point_mass() const noexcept { return std::holds_alternative<PointMass>(law_); }
    const std::variant<PointMass, BetaFamily>& law() const noexcept { return law_; }
    std::size_t quadrature_nodes() const noexcept { return nodes_; }

    /// Beta shape f(D) = 1/m(D) - 1; throws Unsupported for a point mass.
    double shape(double default_rate) const;

    /// Conditional expected recovery m(D) (r0 for a point mass).
    double mean_recovery(double default_rate) const;

    /// Expected loss 1 - r under rho(D, .).
    double mean_loss(double default_rate) const;

    /// M(theta, D) = ln E[exp(theta (1 - r))] with its first two theta
    /// derivatives. Requires |theta| <= 700 and D in [0,1].
    convex::Derivatives log_mgf_derivatives(double theta, double default_rate) const;

    double log_mgf(double theta, double default_rate) const {
        return log_mgf_derivatives(theta, default_rate).value;
    }
    double log_mgf_prime(double theta, double default_rate) const {
        return log_mgf_derivatives(theta, default_rate).slope;
    }

    /// I(x, D) = sup_theta { theta x - M(theta, D) }. The maximizer
    /// (argmax) is dI/dx.
    convex::LegendrePoint loss_rate_point(double x, double default_rate, double guess = 0.0) const;
    ExtReal loss_rate_function(double x, double default_rate) const {
        return loss_rate_point(x, default_rate).value;
    }

    LossSupport support(double default_rate) const;

    /// Draw a recovery fraction r ~ rho(D, .).
    double sample(double default_rate, Stream& rng) const;

    /// Draw r with law proportional to exp(theta (1 - r)) rho(D, dr), by
    /// rejection from sample(). Throws NumericalFailure after 1e6 rejections.
    double sample_tilted(double theta, double default_rate, Stream& rng) const;

    friend bool operator==(const RecoveryModel& a, const RecoveryModel& b) {
        return a.law_ == b.law_ && a.nodes_ == b.nodes_;
    }

private:
    RecoveryModel(std::variant<PointMass, BetaFamily> law, std::size_t nodes)
        : law_(law), nodes_(nodes) {}

    std::variant<PointMass, BetaFamily> law_;
    std::size_t nodes_;
};

}  // namespace tailrisk::recovery
