// SPDX-License-Identifier: Apache-2.0
#include "tailrisk/tailrisk.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "errors.hpp"
#include "montecarlo.hpp"
#include "parallel.hpp"
#include "pool.hpp"
#include "pool_config.hpp"
#include "rate_engine.hpp"

struct tr_pool {
    tailrisk::pool::PoolSpec spec;
};

struct tr_rate_point {
    tailrisk::rate::RatePoint point;
};

struct tr_rate_curve {
    std::vector<tr_rate_point> points;
    tailrisk::rate::RateCurve curve;
};

namespace {

thread_local std::string last_error;

tr_status fail(tr_status status, const std::string& message) {
    last_error = message;
    return status;
}

// Maps the library's exceptions onto status codes.
template <class F>
tr_status guard(F&& body) {
    using namespace tailrisk;
    try {
        last_error.clear();
        return body();
    } catch (const ConfigError& e) {
        return fail(TR_CONFIG, e.what());
    } catch (const Unsupported& e) {
        return fail(TR_UNSUPPORTED, e.what());
    } catch (const DomainError& e) {
        return fail(TR_INVALID_ARGUMENT, e.what());
    } catch (const Infeasible& e) {
        return fail(TR_INFEASIBLE, e.what());
    } catch (const NumericalFailure& e) {
        return fail(TR_NUMERICAL, e.what());
    } catch (const InsufficientSampling& e) {
        return fail(TR_INSUFFICIENT_SAMPLES, e.what());
    } catch (const std::bad_alloc&) {
        return fail(TR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(TR_INTERNAL, e.what());
    } catch (...) {
        return fail(TR_INTERNAL, "unknown error");
    }
}

#define TR_REQUIRE(cond, msg) \
    do {                      \
        if (!(cond)) return fail(TR_INVALID_ARGUMENT, msg); \
    } while (0)

void fill_summary(const tailrisk::rate::RatePoint& p, tr_rate_summary* out) {
    out->ell = p.ell;
    out->finite = p.rate.is_finite() ? 1 : 0;
    out->rate = p.rate.to_double();
    out->d_star = p.d_star;
    out->r_star = p.r_star;
    out->lambda1 = p.lambda1;
    out->lambda2 = p.lambda2;
    out->boundary_active = p.boundary_active ? 1 : 0;
    out->ok = p.ok ? 1 : 0;
    out->near_minima_count = p.near_minima.size();
}

tr_tail_estimate to_c(const tailrisk::mc::TailEstimate& e) {
    tr_tail_method m = TR_TAIL_NAIVE;
    if (e.method == tailrisk::mc::TailMethod::Tilted) m = TR_TAIL_TILTED;
    if (e.method == tailrisk::mc::TailMethod::Exact) m = TR_TAIL_EXACT;
    return {e.ell, e.n, e.trials, e.p_hat, e.std_err, m};
}

}  // namespace

extern "C" {

const char* tr_version(void) { return TAILRISK_VERSION; }

const char* tr_last_error(void) { return last_error.c_str(); }

const char* tr_status_string(tr_status status) {
    switch (status) {
        case TR_OK: return "ok";
        case TR_INVALID_ARGUMENT: return "invalid argument";
        case TR_CONFIG: return "config error";
        case TR_NUMERICAL: return "numerical failure";
        case TR_INFEASIBLE: return "infeasible";
        case TR_INSUFFICIENT_SAMPLES: return "insufficient samples";
        case TR_UNSUPPORTED: return "unsupported";
        case TR_BUFFER_TOO_SMALL: return "buffer too small";
        case TR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void tr_set_thread_count(unsigned n) { tailrisk::parallel::set_thread_count(n); }

unsigned tr_thread_count(void) { return tailrisk::parallel::thread_count(); }

tr_status tr_pool_preset(int case_id, tr_pool** out) {
    TR_REQUIRE(out, "out is null");
    return guard([&] {
        *out = new tr_pool{tailrisk::pool::preset(case_id)};
        return TR_OK;
    });
}

tr_status tr_pool_parse(const char* text, tr_pool** out) {
    TR_REQUIRE(text && out, "null argument");
    return guard([&] {
        *out = new tr_pool{tailrisk::pool_config::parse(text)};
        return TR_OK;
    });
}

tr_status tr_pool_load(const char* path, tr_pool** out) {
    TR_REQUIRE(path && out, "null argument");
    std::ifstream in(path, std::ios::binary);
    if (!in) return fail(TR_CONFIG, std::string("cannot open ") + path);
    std::ostringstream text;
    text << in.rdbuf();
    const tr_status st = tr_pool_parse(text.str().c_str(), out);
    if (st != TR_OK) last_error = std::string(path) + ": " + last_error;
    return st;
}

void tr_pool_free(tr_pool* pool) { delete pool; }

size_t tr_pool_type_count(const tr_pool* pool) { return pool ? pool->spec.size() : 0; }

tr_status tr_pool_serialize(const tr_pool* pool, char* buf, size_t cap, size_t* needed) {
    TR_REQUIRE(pool, "pool is null");
    return guard([&] {
        const std::string text = tailrisk::pool_config::serialize(pool->spec);
        if (needed) *needed = text.size() + 1;
        if (!buf || cap < text.size() + 1) return fail(TR_BUFFER_TOO_SMALL, "serialization buffer too small");
        std::memcpy(buf, text.c_str(), text.size() + 1);
        return TR_OK;
    });
}

tr_status tr_pool_hash(const tr_pool* pool, char out[17]) {
    TR_REQUIRE(pool && out, "null argument");
    return guard([&] {
        const std::string h = tailrisk::pool_config::pool_hash(pool->spec);
        std::memcpy(out, h.c_str(), 17);
        return TR_OK;
    });
}

tr_status tr_pool_allocate(const tr_pool* pool, size_t n, size_t* counts) {
    TR_REQUIRE(pool && counts, "null argument");
    return guard([&] {
        const auto a = tailrisk::pool::allocate(pool->spec, n);
        std::copy(a.begin(), a.end(), counts);
        return TR_OK;
    });
}

tr_status tr_lln(const tr_pool* pool, double* d_bar, double* l_bar) {
    TR_REQUIRE(pool && d_bar && l_bar, "null argument");
    return guard([&] {
        const auto s = tailrisk::pool::lln(pool->spec);
        *d_bar = s.d_bar;
        *l_bar = s.l_bar;
        return TR_OK;
    });
}

tr_status tr_rate_at(const tr_pool* pool, double ell, tr_rate_point** out) {
    TR_REQUIRE(pool && out, "null argument");
    return guard([&] {
        *out = new tr_rate_point{tailrisk::rate::rate_at(pool->spec, ell)};
        return TR_OK;
    });
}

void tr_rate_point_free(tr_rate_point* point) { delete point; }

tr_status tr_rate_point_summary(const tr_rate_point* point, tr_rate_summary* out) {
    TR_REQUIRE(point && out, "null argument");
    fill_summary(point->point, out);
    return TR_OK;
}

tr_status tr_rate_point_config(const tr_rate_point* point, double* phi, double* psi, size_t count) {
    TR_REQUIRE(point, "point is null");
    TR_REQUIRE(count == point->point.phi.size(), "count does not match the type count");
    if (phi) std::copy(point->point.phi.begin(), point->point.phi.end(), phi);
    if (psi) std::copy(point->point.psi.begin(), point->point.psi.end(), psi);
    return TR_OK;
}

tr_status tr_rate_point_near_minima(const tr_rate_point* point, double* out, size_t count) {
    TR_REQUIRE(point, "point is null");
    TR_REQUIRE(count == point->point.near_minima.size(), "count does not match near_minima_count");
    if (count) {
        TR_REQUIRE(out, "out is null");
        std::copy(point->point.near_minima.begin(), point->point.near_minima.end(), out);
    }
    return TR_OK;
}

const char* tr_rate_point_message(const tr_rate_point* point) {
    return point ? point->point.message.c_str() : "";
}

tr_status tr_rate_curve_compute(const tr_pool* pool, const double* grid, size_t count, int warm_start,
                                tr_rate_curve** out) {
    TR_REQUIRE(pool && out && (grid || count == 0), "null argument");
    return guard([&] {
        auto curve = tailrisk::rate::rate_curve(pool->spec, {grid, count}, warm_start != 0);
        auto handle = std::make_unique<tr_rate_curve>(tr_rate_curve{{}, curve});
        for (const auto& p : curve.points) handle->points.push_back({p});
        *out = handle.release();
        return TR_OK;
    });
}

void tr_rate_curve_free(tr_rate_curve* curve) { delete curve; }

size_t tr_rate_curve_size(const tr_rate_curve* curve) { return curve ? curve->points.size() : 0; }

const tr_rate_point* tr_rate_curve_point(const tr_rate_curve* curve, size_t i) {
    if (!curve || i >= curve->points.size()) return nullptr;
    return &curve->points[i];
}

tr_status tr_recovery_curve(const tr_rate_curve* curve, tr_recovery_point* out, size_t cap, size_t* count) {
    TR_REQUIRE(curve && count, "null argument");
    const auto pts = tailrisk::rate::effective_recovery_curve(curve->curve);
    *count = pts.size();
    if (!out) return TR_OK;
    if (cap < pts.size()) return fail(TR_BUFFER_TOO_SMALL, "recovery buffer too small");
    for (std::size_t i = 0; i < pts.size(); ++i) out[i] = {pts[i].d_star, pts[i].r_star, pts[i].ell};
    return TR_OK;
}

tr_status tr_simulate(const tr_pool* pool, size_t n, size_t trials, uint64_t seed, tr_sim_outcome* out,
                      size_t* defaults) {
    TR_REQUIRE(pool && out, "null argument");
    return guard([&] {
        const auto sims = tailrisk::mc::simulate_batch(pool->spec, n, trials, seed);
        const std::size_t K = pool->spec.size();
        for (std::size_t i = 0; i < sims.size(); ++i) {
            out[i] = {sims[i].n, sims[i].d_n, sims[i].l_n, sims[i].log_weight};
            if (defaults) std::copy(sims[i].defaults_per_type.begin(), sims[i].defaults_per_type.end(), defaults + i * K);
        }
        return TR_OK;
    });
}

tr_status tr_tail_naive(const tr_pool* pool, double ell, size_t n, size_t trials, uint64_t seed,
                        tr_tail_estimate* out) {
    TR_REQUIRE(pool && out, "null argument");
    return guard([&] {
        *out = to_c(tailrisk::mc::tail_naive(pool->spec, ell, n, trials, seed));
        return TR_OK;
    });
}

tr_status tr_tail_exact(const tr_pool* pool, double ell, size_t n, tr_tail_estimate* out) {
    TR_REQUIRE(pool && out, "null argument");
    return guard([&] {
        *out = to_c(tailrisk::mc::tail_exact_pointmass(pool->spec, ell, n));
        return TR_OK;
    });
}

tr_status tr_tail_tilted(const tr_pool* pool, double ell, size_t n, size_t trials, const tr_rate_point* point,
                         uint64_t seed, tr_tail_estimate* out) {
    TR_REQUIRE(pool && point && out, "null argument");
    return guard([&] {
        *out = to_c(tailrisk::mc::tail_tilted(pool->spec, ell, n, trials, point->point, seed));
        return TR_OK;
    });
}

tr_status tr_gibbs_conditional(const tr_pool* pool, double ell, size_t n, size_t trials,
                               const tr_rate_point* point, uint64_t seed, double* mean_d, double* std_err,
                               size_t* hits) {
    TR_REQUIRE(pool && point && mean_d && std_err, "null argument");
    return guard([&] {
        const auto g = tailrisk::mc::gibbs_conditional(pool->spec, ell, n, trials, point->point, seed);
        *mean_d = g.mean_d;
        *std_err = g.std_err;
        if (hits) *hits = g.hits;
        return TR_OK;
    });
}

}  // extern "C"
