// SPDX-License-Identifier: Apache-2.0
#include "pool.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "errors.hpp"

namespace tailrisk::pool {

using recovery::MeanMap;
using recovery::RecoveryModel;

PoolSpec::PoolSpec(std::vector<TypeSpec> types) : types_(std::move(types)) {
    if (types_.empty()) throw DomainError("pool has no types");
    double total = 0.0;
    for (const auto& t : types_) {
        if (!(t.weight > 0.0 && t.weight <= 1.0)) throw DomainError("type weight must lie in (0,1]");
        if (!(t.p >= 0.0 && t.p <= 1.0)) throw DomainError("default probability must lie in [0,1]");
        total += t.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("type weights must sum to 1");
    // Leave already-normalized weights bit-identical so that a written and
    // re-read pool compares equal.
    if (std::abs(total - 1.0) > 1e-15)
        for (auto& t : types_) t.weight /= total;
}

bool PoolSpec::all_point_mass() const noexcept {
    return std::all_of(types_.begin(), types_.end(),
                       [](const TypeSpec& t) { return t.recovery.is_point_mass(); });
}

LlnSummary lln(const PoolSpec& spec) {
    double d_bar = 0.0;
    for (const auto& t : spec.types()) d_bar += t.weight * t.p;
    double l_bar = 0.0;
    for (const auto& t : spec.types()) l_bar += t.weight * t.p * t.recovery.mean_loss(d_bar);
    return {d_bar, l_bar};
}

PoolSpec preset(int case_id) {
    constexpr double p = 0.08;
    constexpr double anchor = 0.08;
    const auto affine = RecoveryModel::beta(MeanMap::affine(0.2, 0.1, anchor));
    const auto quad = RecoveryModel::beta(MeanMap::quadratic(0.2, 0.1, 0.1, anchor));
    switch (case_id) {
        case 1: return PoolSpec({{1.0, p, RecoveryModel::point_mass(0.2)}});
        case 2: return PoolSpec({{1.0, p, affine}});
        case 3: return PoolSpec({{1.0, p, quad}});
        case 4: return PoolSpec({{1.0 / 3.0, p, affine}, {2.0 / 3.0, p, quad}});
        case 5:
            return PoolSpec({{1.0 / 3.0, p, RecoveryModel::beta(MeanMap::affine(0.1, 0.05, anchor))},
                             {2.0 / 3.0, p, RecoveryModel::beta(MeanMap::quadratic(0.25, 0.1, 0.1, anchor))}});
        case 6:
            return PoolSpec({{1.0 / 3.0, p, RecoveryModel::beta(MeanMap::constant(0.1))},
                             {2.0 / 3.0, p, RecoveryModel::beta(MeanMap::constant(0.25))}});
        default: throw DomainError("unknown case id " + std::to_string(case_id) + " (expected 1..6)");
    }
}

std::vector<std::size_t> allocate(const PoolSpec& spec, std::size_t n) {
    const std::size_t k = spec.size();
    std::vector<std::size_t> counts(k);
    std::vector<double> remainder(k);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double exact = static_cast<double>(n) * spec[i].weight;
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        remainder[i] = exact - static_cast<double>(counts[i]);
        assigned += counts[i];
    }
    // Rounding in n * w can overshoot by a name when weights are not exact.
    while (assigned > n) {
        auto it = std::max_element(counts.begin(), counts.end());
        --*it;
        --assigned;
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < n; i = (i + 1) % k, ++assigned) ++counts[order[i]];
    return counts;
}

}  // namespace tailrisk::pool
