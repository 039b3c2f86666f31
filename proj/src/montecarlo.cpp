// SPDX-License-Identifier: Apache-2.0
#include "montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "convex.hpp"
#include "errors.hpp"
#include "parallel.hpp"

namespace tailrisk::mc {
namespace {

using pool::PoolSpec;

struct Sums {
    double x = 0.0, xx = 0.0, y = 0.0, yy = 0.0, xy = 0.0;
    std::size_t hits = 0;

    Sums& operator+=(const Sums& o) {
        x += o.x; xx += o.xx; y += o.y; yy += o.yy; xy += o.xy;
        hits += o.hits;
        return *this;
    }
};

// Runs body(first, last) on blocks of kBlockSize trials and adds the block
// sums in block order.
template <class Body>
Sums reduce_blocks(std::size_t trials, Body&& body) {
    const std::size_t blocks = (trials + kBlockSize - 1) / kBlockSize;
    std::vector<Sums> partial(blocks);
    parallel::for_each_index(blocks, [&](std::size_t b) {
        const std::size_t first = b * kBlockSize;
        partial[b] = body(first, std::min(trials, first + kBlockSize));
    });
    Sums total;
    for (const auto& s : partial) total += s;
    return total;
}

bool in_tail(double l_n, double ell) { return l_n >= ell - kTailSlack; }

// Draws the defaults of every name (per type, in type order) then the
// recoveries of the defaulted names. `prob` overrides the default
// probabilities, `theta` tilts the recoveries.
SimOutcome draw(const PoolSpec& spec, const std::vector<std::size_t>& alloc,
                const std::vector<double>& prob, double theta, Stream& rng) {
    const std::size_t K = spec.size();
    SimOutcome out;
    out.n = 0;
    for (auto a : alloc) out.n += a;
    out.defaults_per_type.assign(K, 0);
    std::size_t total = 0;
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t i = 0; i < alloc[k]; ++i)
            if (rng.bernoulli(prob[k])) ++out.defaults_per_type[k];
        total += out.defaults_per_type[k];
    }
    const double n = static_cast<double>(out.n);
    out.d_n = static_cast<double>(total) / n;

    double loss = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const auto& rec = spec[k].recovery;
        for (std::size_t i = 0; i < out.defaults_per_type[k]; ++i) {
            const double r = theta == 0.0 ? rec.sample(out.d_n, rng) : rec.sample_tilted(theta, out.d_n, rng);
            loss += 1.0 - r;
        }
    }
    out.l_n = std::min(loss / n, out.d_n);
    return out;
}

std::vector<double> nominal_probs(const PoolSpec& spec) {
    std::vector<double> p;
    for (const auto& t : spec.types()) p.push_back(t.p);
    return p;
}

void check_sizes(std::size_t n, std::size_t trials) {
    if (n == 0) throw DomainError("pool size must be at least 1");
    if (trials == 0) throw DomainError("trial count must be at least 1");
}

// Tilted sampler parameters taken from a rate point.
struct Tilt {
    double theta;
    std::vector<double> phi;
    std::vector<double> g;          // hbar'_p(phi), the per-type default tilt
    double log_norm_defaults = 0.0; // sum_k alloc_k lambda_{p_k}(g_k)
};

Tilt make_tilt(const PoolSpec& spec, const rate::RatePoint& point, const std::vector<std::size_t>& alloc) {
    if (!point.ok || point.rate.is_infinite()) throw DomainError("tilted sampling needs a finite rate point");
    if (point.phi.size() != spec.size()) throw DomainError("rate point does not match the pool");
    Tilt t{std::isfinite(point.lambda1) ? point.lambda1 : 0.0, point.phi, {}, 0.0};
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const double p = spec[k].p, phi = point.phi[k];
        double g = 0.0;
        if (phi != p) {
            if (!(p > 0.0 && p < 1.0 && phi > 0.0 && phi < 1.0))
                throw DomainError("tilted default probability at a boundary cannot be sampled");
            g = convex::hbar_prime(p, phi);
        }
        t.g.push_back(g);
        t.log_norm_defaults += static_cast<double>(alloc[k]) * convex::lambda_small(p, g);
    }
    return t;
}

// Log likelihood ratio dP/dP~ of one tilted draw; `mgf` holds M_k(theta, D_N).
double log_weight(const SimOutcome& s, const Tilt& t, const std::vector<double>& mgf) {
    const double n = static_cast<double>(s.n);
    double log_tilt = t.theta * s.l_n * n - t.log_norm_defaults;
    for (std::size_t k = 0; k < t.g.size(); ++k) {
        const double c = static_cast<double>(s.defaults_per_type[k]);
        if (c == 0.0) continue;
        log_tilt += c * t.g[k];
        if (t.theta != 0.0) log_tilt -= c * mgf[k];
    }
    return -log_tilt;
}

// Runs the tilted sampler; sums x = 1{tail} w and y = D_N x.
Sums tilted_sums(const PoolSpec& spec, double ell, std::size_t n, std::size_t trials,
                 const rate::RatePoint& point, std::uint64_t seed) {
    check_sizes(n, trials);
    const auto alloc = pool::allocate(spec, n);
    const Tilt tilt = make_tilt(spec, point, alloc);
    return reduce_blocks(trials, [&](std::size_t first, std::size_t last) {
        Sums s;
        std::unordered_map<std::size_t, std::vector<double>> mgf_cache;   // keyed by default count
        for (std::size_t i = first; i < last; ++i) {
            Stream rng(seed, i);
            SimOutcome o = draw(spec, alloc, tilt.phi, tilt.theta, rng);
            if (!in_tail(o.l_n, ell)) continue;
            std::size_t count = 0;
            for (auto c : o.defaults_per_type) count += c;
            auto it = mgf_cache.find(count);
            if (it == mgf_cache.end()) {
                std::vector<double> m(spec.size(), 0.0);
                if (tilt.theta != 0.0)
                    for (std::size_t k = 0; k < spec.size(); ++k)
                        m[k] = spec[k].recovery.log_mgf(tilt.theta, o.d_n);
                it = mgf_cache.emplace(count, std::move(m)).first;
            }
            const double w = std::exp(log_weight(o, tilt, it->second));
            s.x += w;
            s.xx += w * w;
            s.y += o.d_n * w;
            s.yy += o.d_n * o.d_n * w * w;
            s.xy += o.d_n * w * w;
            ++s.hits;
        }
        return s;
    });
}

}  // namespace

std::string_view to_string(TailMethod m) noexcept {
    switch (m) {
        case TailMethod::Naive: return "naive";
        case TailMethod::Tilted: return "tilted";
        case TailMethod::Exact: return "exact";
    }
    return "naive";
}

SimOutcome simulate(const PoolSpec& spec, std::size_t n, Stream& rng) {
    if (n == 0) throw DomainError("pool size must be at least 1");
    return draw(spec, pool::allocate(spec, n), nominal_probs(spec), 0.0, rng);
}

std::vector<SimOutcome> simulate_batch(const PoolSpec& spec, std::size_t n, std::size_t trials,
                                       std::uint64_t seed) {
    check_sizes(n, trials);
    const auto alloc = pool::allocate(spec, n);
    const auto prob = nominal_probs(spec);
    std::vector<SimOutcome> out(trials);
    parallel::for_each_index(trials, [&](std::size_t i) {
        Stream rng(seed, i);
        out[i] = draw(spec, alloc, prob, 0.0, rng);
    });
    return out;
}

TailEstimate tail_naive(const PoolSpec& spec, double ell, std::size_t n, std::size_t trials,
                        std::uint64_t seed) {
    check_sizes(n, trials);
    const auto alloc = pool::allocate(spec, n);
    const auto prob = nominal_probs(spec);
    const Sums s = reduce_blocks(trials, [&](std::size_t first, std::size_t last) {
        Sums b;
        for (std::size_t i = first; i < last; ++i) {
            Stream rng(seed, i);
            if (in_tail(draw(spec, alloc, prob, 0.0, rng).l_n, ell)) ++b.hits;
        }
        return b;
    });
    const double t = static_cast<double>(trials);
    const double p = static_cast<double>(s.hits) / t;
    return {ell, n, trials, p, std::sqrt(p * (1.0 - p) / t), TailMethod::Naive};
}

TailEstimate tail_exact_pointmass(const PoolSpec& spec, double ell, std::size_t n) {
    if (n == 0) throw DomainError("pool size must be at least 1");
    if (!spec.all_point_mass()) throw Unsupported("exact tail needs a pool of point-mass recoveries");
    const double a = spec[0].recovery.mean_loss(0.0);
    const double p = spec[0].p;
    for (const auto& t : spec.types())
        if (t.recovery.mean_loss(0.0) != a || t.p != p)
            throw Unsupported("exact tail needs a common recovery and default probability");

    TailEstimate est{ell, n, 0, 0.0, 0.0, TailMethod::Exact};
    const double nd = static_cast<double>(n);
    if (ell <= 0.0) {
        est.p_hat = 1.0;
        return est;
    }
    if (a <= 0.0) return est;
    const double k_real = std::ceil(nd * ell / a - 1e-12);
    if (k_real > nd) return est;
    const auto k0 = static_cast<std::size_t>(std::max(0.0, k_real));
    if (k0 == 0 || p >= 1.0) {
        est.p_hat = 1.0;
        return est;
    }
    if (p <= 0.0) return est;

    const double lp = std::log(p), lq = std::log1p(-p);
    const double lgn = std::lgamma(nd + 1.0);
    std::vector<double> terms;
    for (std::size_t k = k0; k <= n; ++k) {
        const double kd = static_cast<double>(k);
        terms.push_back(lgn - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) + kd * lp + (nd - kd) * lq);
    }
    const double top = *std::max_element(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - top);
    est.p_hat = std::min(1.0, std::exp(top + std::log(sum)));
    return est;
}

TailEstimate tail_tilted(const PoolSpec& spec, double ell, std::size_t n, std::size_t trials,
                         const rate::RatePoint& point, std::uint64_t seed) {
    const Sums s = tilted_sums(spec, ell, n, trials, point, seed);
    const double t = static_cast<double>(trials);
    const double mean = s.x / t;
    const double var = trials > 1 ? std::max(0.0, (s.xx - t * mean * mean) / (t - 1.0)) : 0.0;
    return {ell, n, trials, std::min(1.0, mean), std::sqrt(var / t), TailMethod::Tilted};
}

GibbsEstimate gibbs_conditional(const PoolSpec& spec, double ell, std::size_t n, std::size_t trials,
                                const rate::RatePoint& point, std::uint64_t seed) {
    const Sums s = tilted_sums(spec, ell, n, trials, point, seed);
    if (s.hits == 0 || !(s.x > 0.0))
        throw InsufficientSampling("no trial reached the loss level; increase the trial count");
    const double t = static_cast<double>(trials);
    const double ratio = s.y / s.x;
    // Delta method: Var(ratio) ~ Var(y - ratio x) / (t mean(x)^2).
    const double resid = std::max(0.0, s.yy - 2.0 * ratio * s.xy + ratio * ratio * s.xx);
    const double mean_x = s.x / t;
    const double se = trials > 1 ? std::sqrt(resid / (t * (t - 1.0))) / mean_x : 0.0;
    return {ratio, se, s.hits};
}

}  // namespace tailrisk::mc
