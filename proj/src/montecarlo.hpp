// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "pool.hpp"
#include "rate_engine.hpp"
#include "rng.hpp"

/// Finite-pool simulation and tail-probability estimators.
///
/// Every estimator runs trial i on Stream(seed, i) and reduces partial sums
/// over fixed blocks of trials in block order, so results depend only on
/// the seed and never on the worker count.
namespace tailrisk::mc {

struct SimOutcome {
    std::size_t n = 0;
    std::vector<std::size_t> defaults_per_type;
    double d_n = 0.0;
    double l_n = 0.0;
    double log_weight = 0.0;
};

enum class TailMethod { Naive, Tilted, Exact };
std::string_view to_string(TailMethod m) noexcept;

struct TailEstimate {
    double ell = 0.0;
    std::size_t n = 0;
    std::size_t trials = 0;
    double p_hat = 0.0;
    double std_err = 0.0;
    TailMethod method = TailMethod::Naive;
};

struct GibbsEstimate {
    double mean_d = 0.0;
    double std_err = 0.0;
    std::size_t hits = 0;   // trials that landed in the tail event
};

/// Trials per reduction block.
inline constexpr std::size_t kBlockSize = 4096;

/// The tail event is L_N >= ell - kTailSlack, so that loss levels hit
/// exactly by a lattice point are not lost to rounding.
inline constexpr double kTailSlack = 1e-12;

/// One pool realization: names are allocated to types by largest
/// remainder, every default is drawn first, then each defaulted name's
/// recovery is drawn at the realized default rate.
SimOutcome simulate(const pool::PoolSpec& spec, std::size_t n, Stream& rng);

/// simulate() for trials 0..trials-1 of the given seed.
std::vector<SimOutcome> simulate_batch(const pool::PoolSpec& spec, std::size_t n,
                                       std::size_t trials, std::uint64_t seed);

/// Crude Monte Carlo estimate of P(L_N >= ell) with binomial std error.
TailEstimate tail_naive(const pool::PoolSpec& spec, double ell, std::size_t n,
                        std::size_t trials, std::uint64_t seed);

/// Exact P(L_N >= ell) for pools of point masses sharing one loss value a
/// and one default probability p: P(Bin(n, p) >= ceil(n ell / a - 1e-12)).
/// Throws Unsupported for any other pool.
TailEstimate tail_exact_pointmass(const pool::PoolSpec& spec, double ell, std::size_t n);

/// Importance-sampling estimate: defaults drawn with the tilted
/// probabilities phi of `point`, recoveries exponentially tilted by its
/// lambda1 at the realized default rate. Throws DomainError if the point
/// has an infinite rate or a tilt the sampler cannot represent.
TailEstimate tail_tilted(const pool::PoolSpec& spec, double ell, std::size_t n,
                         std::size_t trials, const rate::RatePoint& point, std::uint64_t seed);

/// Weighted estimate of E[D_N | L_N >= ell] under the tilted sampler, with
/// a delta-method standard error. Throws InsufficientSampling if no trial
/// reaches the event.
GibbsEstimate gibbs_conditional(const pool::PoolSpec& spec, double ell, std::size_t n,
                                std::size_t trials, const rate::RatePoint& point,
                                std::uint64_t seed);

}  // namespace tailrisk::mc
