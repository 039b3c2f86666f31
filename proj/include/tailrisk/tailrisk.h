// SPDX-License-Identifier: Apache-2.0
/*
 * tailrisk: large-deviations tail asymptotics for the loss rate of a large
 * credit pool with default-dependent recoveries.
 *
 * All handles are opaque and owned by the caller once returned. Functions
 * report failure through tr_status; the message of the last failure on the
 * calling thread is available from tr_last_error().
 */
#ifndef TAILRISK_TAILRISK_H
#define TAILRISK_TAILRISK_H

#include <stddef.h>
#include <stdint.h>

#if defined(TAILRISK_BUILDING)
#define TR_API __attribute__((visibility("default")))
#else
#define TR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tr_status {
    TR_OK = 0,
    TR_INVALID_ARGUMENT = 1,
    TR_CONFIG = 2,
    TR_NUMERICAL = 3,
    TR_INFEASIBLE = 4,
    TR_INSUFFICIENT_SAMPLES = 5,
    TR_UNSUPPORTED = 6,
    TR_BUFFER_TOO_SMALL = 7,
    TR_INTERNAL = 8
} tr_status;

typedef enum tr_tail_method {
    TR_TAIL_NAIVE = 0,
    TR_TAIL_TILTED = 1,
    TR_TAIL_EXACT = 2
} tr_tail_method;

typedef struct tr_pool tr_pool;
typedef struct tr_rate_point tr_rate_point;
typedef struct tr_rate_curve tr_rate_curve;

/* Scalar part of a rate-function point. rate, d_star and r_star are
 * INFINITY / NAN when the loss level is unreachable. */
typedef struct tr_rate_summary {
    double ell;
    double rate;
    int finite;
    double d_star;
    double r_star;
    double lambda1;
    double lambda2;
    int boundary_active;
    int ok;                     /* 0 if the solver failed at this point */
    size_t near_minima_count;
} tr_rate_summary;

typedef struct tr_recovery_point {
    double d_star;
    double r_star;
    double ell;
} tr_recovery_point;

typedef struct tr_sim_outcome {
    size_t n;
    double d_n;
    double l_n;
    double log_weight;
} tr_sim_outcome;

typedef struct tr_tail_estimate {
    double ell;
    size_t n;
    size_t trials;
    double p_hat;
    double std_err;
    tr_tail_method method;
} tr_tail_estimate;

TR_API const char* tr_version(void);
TR_API const char* tr_last_error(void);
TR_API const char* tr_status_string(tr_status status);

/* Worker threads for parallel sections; 0 falls back to TAILRISK_THREADS
 * and then to the hardware concurrency. Results never depend on it. */
TR_API void tr_set_thread_count(unsigned n);
TR_API unsigned tr_thread_count(void);

/* ---- pools ---- */

/* Built-in example pools, case_id in 1..6. */
TR_API tr_status tr_pool_preset(int case_id, tr_pool** out);
TR_API tr_status tr_pool_parse(const char* text, tr_pool** out);
TR_API tr_status tr_pool_load(const char* path, tr_pool** out);
TR_API void tr_pool_free(tr_pool* pool);

TR_API size_t tr_pool_type_count(const tr_pool* pool);

/* Writes the config text including its NUL into buf when it fits;
 * *needed always receives the required size. */
TR_API tr_status tr_pool_serialize(const tr_pool* pool, char* buf, size_t cap, size_t* needed);

/* 16 hex digits plus NUL. */
TR_API tr_status tr_pool_hash(const tr_pool* pool, char out[17]);

/* Names per type for a pool of n names; counts has tr_pool_type_count slots. */
TR_API tr_status tr_pool_allocate(const tr_pool* pool, size_t n, size_t* counts);

TR_API tr_status tr_lln(const tr_pool* pool, double* d_bar, double* l_bar);

/* ---- rate function ---- */

TR_API tr_status tr_rate_at(const tr_pool* pool, double ell, tr_rate_point** out);
TR_API void tr_rate_point_free(tr_rate_point* point);
TR_API tr_status tr_rate_point_summary(const tr_rate_point* point, tr_rate_summary* out);

/* Optimal tilted default probabilities and conditional mean losses per
 * type; either output may be NULL. count must equal the type count. */
TR_API tr_status tr_rate_point_config(const tr_rate_point* point, double* phi, double* psi, size_t count);

/* Default rates of the other near-optimal local minima. */
TR_API tr_status tr_rate_point_near_minima(const tr_rate_point* point, double* out, size_t count);

/* grid must be strictly increasing. warm_start != 0 seeds each point with
 * its predecessor's multiplier and runs sequentially. */
TR_API tr_status tr_rate_curve_compute(const tr_pool* pool, const double* grid, size_t count,
                                       int warm_start, tr_rate_curve** out);
TR_API void tr_rate_curve_free(tr_rate_curve* curve);
TR_API size_t tr_rate_curve_size(const tr_rate_curve* curve);

/* Borrow point i of the curve; valid until the curve is freed. */
TR_API const tr_rate_point* tr_rate_curve_point(const tr_rate_curve* curve, size_t i);

/* Empty string when the point solved cleanly; owned by the point. */
TR_API const char* tr_rate_point_message(const tr_rate_point* point);

/* Finite-rate points as (D*, R*, ell), sorted by D*. *count receives the
 * number of points; out may be NULL to query it. */
TR_API tr_status tr_recovery_curve(const tr_rate_curve* curve, tr_recovery_point* out, size_t cap,
                                   size_t* count);

/* ---- simulation ---- */

/* trials independent pools of n names. defaults, if non-NULL, receives
 * trials x type_count default counts in row-major order. */
TR_API tr_status tr_simulate(const tr_pool* pool, size_t n, size_t trials, uint64_t seed,
                             tr_sim_outcome* out, size_t* defaults);

TR_API tr_status tr_tail_naive(const tr_pool* pool, double ell, size_t n, size_t trials,
                               uint64_t seed, tr_tail_estimate* out);
TR_API tr_status tr_tail_exact(const tr_pool* pool, double ell, size_t n, tr_tail_estimate* out);

/* point must come from tr_rate_at on the same pool and loss level. */
TR_API tr_status tr_tail_tilted(const tr_pool* pool, double ell, size_t n, size_t trials,
                                const tr_rate_point* point, uint64_t seed, tr_tail_estimate* out);

/* E[D_N | L_N >= ell] under the tilted sampler. */
TR_API tr_status tr_gibbs_conditional(const tr_pool* pool, double ell, size_t n, size_t trials,
                                      const tr_rate_point* point, uint64_t seed,
                                      double* mean_d, double* std_err, size_t* hits);

#ifdef __cplusplus
}
#endif

#endif /* TAILRISK_TAILRISK_H */
