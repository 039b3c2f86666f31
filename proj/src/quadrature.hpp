// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace tailrisk::quadrature {

/// Gauss-Legendre rule on [0,1].
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point rule on [0,1]; nodes ascending. Rules are computed once per n and
/// cached for the lifetime of the process (thread-safe).
const Rule& gauss_legendre(std::size_t n);

}  // namespace tailrisk::quadrature
