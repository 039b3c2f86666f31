// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <tailrisk/tailrisk.h>

TEST_CASE("version and status strings") {
    CHECK(std::string(tr_version()).size() > 0);
    CHECK(std::string(tr_status_string(TR_OK)) == "ok");
    CHECK(std::string(tr_status_string(TR_UNSUPPORTED)) == "unsupported");
}

TEST_CASE("pool lifecycle") {
    tr_pool* pool = nullptr;
    REQUIRE(tr_pool_preset(4, &pool) == TR_OK);
    CHECK(tr_pool_type_count(pool) == 2);

    double d = 0, l = 0;
    REQUIRE(tr_lln(pool, &d, &l) == TR_OK);
    CHECK(d == doctest::Approx(0.08));
    CHECK(l == doctest::Approx(0.064));

    size_t counts[2];
    REQUIRE(tr_pool_allocate(pool, 25, counts) == TR_OK);
    CHECK(counts[0] == 8);
    CHECK(counts[1] == 17);

    size_t need = 0;
    CHECK(tr_pool_serialize(pool, nullptr, 0, &need) == TR_BUFFER_TOO_SMALL);
    REQUIRE(need > 1);
    std::string text(need, '\0');
    REQUIRE(tr_pool_serialize(pool, text.data(), text.size(), &need) == TR_OK);

    tr_pool* back = nullptr;
    REQUIRE(tr_pool_parse(text.c_str(), &back) == TR_OK);
    char h1[17], h2[17];
    REQUIRE(tr_pool_hash(pool, h1) == TR_OK);
    REQUIRE(tr_pool_hash(back, h2) == TR_OK);
    CHECK(std::string(h1) == std::string(h2));
    tr_pool_free(back);
    tr_pool_free(pool);
}

TEST_CASE("errors set status and message") {
    tr_pool* pool = nullptr;
    CHECK(tr_pool_preset(9, &pool) == TR_INVALID_ARGUMENT);
    CHECK(pool == nullptr);
    CHECK(std::string(tr_last_error()).size() > 0);

    CHECK(tr_pool_parse("[pool]\n[[pool.types]]\nweight = x\n", &pool) == TR_CONFIG);
    CHECK(std::string(tr_last_error()).find("line 3") != std::string::npos);

    CHECK(tr_pool_load("/nonexistent/pool.toml", &pool) == TR_CONFIG);
    CHECK(tr_pool_preset(1, nullptr) == TR_INVALID_ARGUMENT);

    REQUIRE(tr_pool_preset(2, &pool) == TR_OK);
    tr_tail_estimate est;
    CHECK(tr_tail_exact(pool, 0.2, 25, &est) == TR_UNSUPPORTED);
    tr_pool_free(pool);
}

TEST_CASE("rate points and curves") {
    tr_pool* pool = nullptr;
    REQUIRE(tr_pool_preset(1, &pool) == TR_OK);
    tr_rate_point* pt = nullptr;
    REQUIRE(tr_rate_at(pool, 0.4, &pt) == TR_OK);
    tr_rate_summary s;
    REQUIRE(tr_rate_point_summary(pt, &s) == TR_OK);
    CHECK(s.finite == 1);
    CHECK(s.ok == 1);
    CHECK(s.d_star == doctest::Approx(0.5));
    double phi = 0, psi = 0;
    REQUIRE(tr_rate_point_config(pt, &phi, &psi, 1) == TR_OK);
    CHECK(phi == doctest::Approx(0.5));
    CHECK(psi == doctest::Approx(0.8));
    CHECK(tr_rate_point_config(pt, &phi, &psi, 2) == TR_INVALID_ARGUMENT);
    tr_rate_point_free(pt);

    REQUIRE(tr_rate_at(pool, 0.9, &pt) == TR_OK);
    REQUIRE(tr_rate_point_summary(pt, &s) == TR_OK);
    CHECK(s.finite == 0);
    CHECK(std::isinf(s.rate));
    tr_rate_point_free(pt);

    const double grid[] = {0.064, 0.1, 0.2, 0.9};
    tr_rate_curve* curve = nullptr;
    REQUIRE(tr_rate_curve_compute(pool, grid, 4, 1, &curve) == TR_OK);
    CHECK(tr_rate_curve_size(curve) == 4);
    REQUIRE(tr_rate_point_summary(tr_rate_curve_point(curve, 2), &s) == TR_OK);
    CHECK(s.ell == 0.2);
    CHECK(tr_rate_curve_point(curve, 4) == nullptr);
    size_t count = 0;
    REQUIRE(tr_recovery_curve(curve, nullptr, 0, &count) == TR_OK);
    CHECK(count == 3);
    std::vector<tr_recovery_point> rec(count);
    CHECK(tr_recovery_curve(curve, rec.data(), 1, &count) == TR_BUFFER_TOO_SMALL);
    REQUIRE(tr_recovery_curve(curve, rec.data(), rec.size(), &count) == TR_OK);
    CHECK(rec[0].r_star == doctest::Approx(0.2));
    tr_rate_curve_free(curve);

    const double bad[] = {0.2, 0.1};
    CHECK(tr_rate_curve_compute(pool, bad, 2, 1, &curve) == TR_INVALID_ARGUMENT);
    tr_pool_free(pool);
}

TEST_CASE("simulation and tail estimates") {
    tr_pool* pool = nullptr;
    REQUIRE(tr_pool_preset(1, &pool) == TR_OK);
    std::vector<tr_sim_outcome> sims(50);
    std::vector<size_t> defaults(50);
    REQUIRE(tr_simulate(pool, 25, 50, 7, sims.data(), defaults.data()) == TR_OK);
    for (size_t i = 0; i < sims.size(); ++i) CHECK(sims[i].d_n * 25 == doctest::Approx(double(defaults[i])));

    tr_tail_estimate exact, tilted;
    REQUIRE(tr_tail_exact(pool, 0.32, 25, &exact) == TR_OK);
    CHECK(exact.method == TR_TAIL_EXACT);
    tr_rate_point* pt = nullptr;
    REQUIRE(tr_rate_at(pool, 0.32, &pt) == TR_OK);
    REQUIRE(tr_tail_tilted(pool, 0.32, 25, 10000, pt, 3, &tilted) == TR_OK);
    CHECK(std::abs(tilted.p_hat - exact.p_hat) <= 3 * tilted.std_err);

    double mean_d = 0, se = 0;
    size_t hits = 0;
    REQUIRE(tr_gibbs_conditional(pool, 0.32, 100, 2000, pt, 3, &mean_d, &se, &hits) == TR_OK);
    CHECK(mean_d >= 0.4);
    CHECK(tr_gibbs_conditional(pool, 0.9, 25, 100, pt, 3, &mean_d, &se, &hits) == TR_INSUFFICIENT_SAMPLES);
    tr_rate_point_free(pt);

    tr_set_thread_count(2);
    CHECK(tr_thread_count() == 2);
    tr_set_thread_count(0);
    tr_pool_free(pool);
}
