// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "pool.hpp"

/// Text form of a PoolSpec: a small TOML subset.
///
///   [pool]
///   [[pool.types]]
///   weight = 0.3333333333333333     # or the rational literal 1/3
///   default_prob = 0.08
///   recovery.kind = "beta_affine"   # point_mass | beta_affine |
///   recovery.base = 0.2             # beta_quadratic | beta_constant
///   recovery.slope = 0.1
///   recovery.anchor = 0.08
///
/// `recovery = { kind = "point_mass", r0 = 0.2 }` is accepted as well.
/// Recovery parameters: r0 (point_mass); base, slope, curvature, anchor
/// (as the kind requires); optional integer `nodes` for beta kinds.
namespace tailrisk::pool_config {

/// Throws ConfigError carrying the offending line.
pool::PoolSpec parse(std::string_view text);

/// Canonical text; parse(serialize(s)) == s.
std::string serialize(const pool::PoolSpec& spec);

/// FNV-1a 64 of the canonical text, as 16 lowercase hex digits.
std::string pool_hash(const pool::PoolSpec& spec);

}  // namespace tailrisk::pool_config
