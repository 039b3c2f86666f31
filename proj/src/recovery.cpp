// SPDX-License-Identifier: Apache-2.0
#include "recovery.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"

namespace tailrisk::recovery {
namespace {

constexpr double kThetaLimit = 700.0;
constexpr double kPointMassTolerance = 1e-12;
constexpr long kMaxRejections = 1'000'000;

// Largest exponent swing allowed across one quadrature panel.
constexpr double kPanelSwing = 40.0;

void require_rate(double d) {
    if (!(d >= 0.0 && d <= 1.0)) throw DomainError("default rate outside [0,1]");
}

void require_theta(double theta) {
    if (!(std::abs(theta) <= kThetaLimit)) throw DomainError("|theta| exceeds 700");
}

// Moments of the loss s = 1 - r under e^{theta s} beta s^{beta-1} ds.
//
// With m = ceil(beta) and s = v^k, k = m / beta, the density becomes
// m v^{m-1} dv: a polynomial weight, and the only non-smooth term left is
// v^k with k >= 1. Panels are graded geometrically away from the end where
// e^{theta s} peaks so that no panel sees a swing of more than kPanelSwing
// in the exponent.
convex::Derivatives beta_log_mgf(double beta, double theta, std::size_t nodes) {
    const double m = std::max(1.0, std::ceil(beta - 1e-12));
    const double k = m / beta;
    const double peak = theta > 0.0 ? 1.0 : 0.0;

    std::vector<double> edges;
    const double a = std::abs(theta);
    if (theta > 0.0 && a * k > kPanelSwing) {
        const double w = kPanelSwing / (a * k);
        edges.push_back(1.0);
        for (double d = w; d < 1.0; d *= 2.0) edges.push_back(1.0 - d);
        edges.push_back(0.0);
        std::reverse(edges.begin(), edges.end());
    } else if (theta < 0.0 && a > kPanelSwing) {
        const double w = std::pow(kPanelSwing / a, 1.0 / k);
        edges.push_back(0.0);
        for (double d = w; d < 1.0; d *= 2.0) edges.push_back(d);
        edges.push_back(1.0);
    } else {
        edges = {0.0, 1.0};
    }

    const auto& rule = quadrature::gauss_legendre(nodes);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double lo = edges[p];
        const double h = edges[p + 1] - lo;
        for (std::size_t i = 0; i < nodes; ++i) {
            const double v = lo + h * rule.nodes[i];
            if (v <= 0.0) continue;
            const double s = std::exp(k * std::log(v));
            const double t = s - peak;
            const double w = h * rule.weights[i] * m * std::pow(v, m - 1.0) * std::exp(theta * t);
            s0 += w;
            s1 += w * t;
            s2 += w * t * t;
        }
    }
    const double mean_t = s1 / s0;
    const double var = std::max(0.0, s2 / s0 - mean_t * mean_t);
    return {theta * peak + std::log(s0), peak + mean_t, var};
}

}  // namespace

std::string_view to_string(MeanMapKind kind) {
    switch (kind) {
        case MeanMapKind::Affine: return "beta_affine";
        case MeanMapKind::Quadratic: return "beta_quadratic";
        case MeanMapKind::Constant: return "beta_constant";
    }
    return "unknown";
}

RecoveryModel RecoveryModel::point_mass(double r0) {
    if (!(r0 >= 0.0 && r0 <= 1.0)) throw DomainError("point-mass recovery outside [0,1]");
    return RecoveryModel(PointMass{r0}, kDefaultNodes);
}

RecoveryModel RecoveryModel::beta(const MeanMap& mean_map, std::size_t nodes) {
    if (nodes < 2) throw DomainError("beta recovery needs at least 2 quadrature nodes");
    if (mean_map.kind == MeanMapKind::Constant && (mean_map.slope != 0.0 || mean_map.curvature != 0.0))
        throw DomainError("constant mean map must have zero slope and curvature");
    if (mean_map.kind == MeanMapKind::Affine && mean_map.curvature != 0.0)
        throw DomainError("affine mean map must have zero curvature");
    for (int i = 0; i <= 1000; ++i) {
        const double m = mean_map(i * 1e-3);
        if (!(m > 0.0 && m < 1.0))
            throw DomainError("mean recovery leaves (0,1) at D = " + std::to_string(i * 1e-3));
    }
    return RecoveryModel(BetaFamily{mean_map}, nodes);
}

double RecoveryModel::shape(double default_rate) const {
    const auto* b = std::get_if<BetaFamily>(&law_);
    if (!b) throw Unsupported("shape() is only defined for beta recoveries");
    return 1.0 / b->mean_map(default_rate) - 1.0;
}

double RecoveryModel::mean_recovery(double default_rate) const {
    require_rate(default_rate);
    if (const auto* pm = std::get_if<PointMass>(&law_)) return pm->r0;
    return std::get<BetaFamily>(law_).mean_map(default_rate);
}

double RecoveryModel::mean_loss(double default_rate) const {
    return 1.0 - mean_recovery(default_rate);
}

convex::Derivatives RecoveryModel::log_mgf_derivatives(double theta, double default_rate) const {
    require_rate(default_rate);
    require_theta(theta);
    if (const auto* pm = std::get_if<PointMass>(&law_)) {
        const double a = 1.0 - pm->r0;
        return {theta * a, a, 0.0};
    }
    if (theta == 0.0) return {0.0, mean_loss(default_rate), beta_log_mgf(shape(default_rate), 0.0, nodes_).curvature};
    return beta_log_mgf(shape(default_rate), theta, nodes_);
}

convex::LegendrePoint RecoveryModel::loss_rate_point(double x, double default_rate, double guess) const {
    require_rate(default_rate);
    if (const auto* pm = std::get_if<PointMass>(&law_)) {
        if (std::abs(x - (1.0 - pm->r0)) <= kPointMassTolerance) return {ExtReal(0.0), 0.0, false};
        return {ExtReal::infinity(), 0.0, false};
    }
    // Atomless on [0,1]: the endpoints carry no mass.
    if (!(x > 0.0 && x < 1.0)) return {ExtReal::infinity(), 0.0, true};
    const auto f = [this, default_rate](double theta) { return log_mgf_derivatives(theta, default_rate); };
    return convex::legendre_point(f, x, convex::kDefaultBracket, std::clamp(guess, -kThetaLimit, kThetaLimit));
}

LossSupport RecoveryModel::support(double default_rate) const {
    require_rate(default_rate);
    if (const auto* pm = std::get_if<PointMass>(&law_)) return {1.0 - pm->r0, 1.0 - pm->r0};
    return {0.0, 1.0};
}

double RecoveryModel::sample(double default_rate, Stream& rng) const {
    require_rate(default_rate);
    if (const auto* pm = std::get_if<PointMass>(&law_)) return pm->r0;
    // P(1 - r <= s) = s^beta.
    return 1.0 - std::pow(rng.uniform_open(), 1.0 / shape(default_rate));
}

double RecoveryModel::sample_tilted(double theta, double default_rate, Stream& rng) const {
    require_rate(default_rate);
    require_theta(theta);
    if (is_point_mass() || theta == 0.0) return sample(default_rate, rng);
    const LossSupport sup = support(default_rate);
    const double bound = theta > 0.0 ? sup.alpha_plus : sup.alpha_minus;
    const double inv_beta = 1.0 / shape(default_rate);
    for (long i = 0; i < kMaxRejections; ++i) {
        const double r = 1.0 - std::pow(rng.uniform_open(), inv_beta);
        if (rng.uniform() < std::exp(theta * ((1.0 - r) - bound))) return r;
    }
    throw NumericalFailure("sample_tilted: rejection budget exhausted");
}

}  // namespace tailrisk::recovery
