// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "recovery.hpp"

namespace tailrisk::pool {

/// One class of names: its share of the pool, default probability and
/// recovery law.
struct TypeSpec {
    double weight;
    double p;
    recovery::RecoveryModel recovery;

    friend bool operator==(const TypeSpec&, const TypeSpec&) = default;
};

/// A finitely supported type distribution. Weights are positive and sum to
/// one; construction rejects sums off by more than 1e-12 and otherwise
/// renormalizes.
class PoolSpec {
public:
    explicit PoolSpec(std::vector<TypeSpec> types);

    const std::vector<TypeSpec>& types() const noexcept { return types_; }
    std::size_t size() const noexcept { return types_.size(); }
    const TypeSpec& operator[](std::size_t k) const { return types_[k]; }

    bool all_point_mass() const noexcept;

    friend bool operator==(const PoolSpec&, const PoolSpec&) = default;

private:
    std::vector<TypeSpec> types_;
};

/// Law-of-large-numbers limits of the default and loss rates.
struct LlnSummary {
    double d_bar;
    double l_bar;
};

/// d_bar = sum w p; l_bar = sum w p E[1-r | D = d_bar]. The recovery means
/// are evaluated at the typical default rate, not at each type's own p.
LlnSummary lln(const PoolSpec& spec);

/// The six example pools: common p = 0.08 and l_bar = 0.064 throughout.
///   1: fixed 20% recovery        2: beta, affine mean recovery
///   3: beta, quadratic mean      4: 1/3 case-2 + 2/3 case-3 names
///   5: like 4 with shifted maps  6: like 5 with D-independent means
/// Throws DomainError for ids outside 1..6.
PoolSpec preset(int case_id);

/// Deterministic assignment of n names to types: floor(n w_k) each, with
/// the remainder going to the largest fractional parts (lower index first
/// on ties). Always sums to n.
std::vector<std::size_t> allocate(const PoolSpec& spec, std::size_t n);

}  // namespace tailrisk::pool
