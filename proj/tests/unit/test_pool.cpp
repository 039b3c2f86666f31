// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <string>

#include "errors.hpp"
#include "pool.hpp"
#include "pool_config.hpp"

using namespace tailrisk;
using namespace tailrisk::pool;
using recovery::MeanMap;
using recovery::RecoveryModel;

TEST_CASE("presets share the typical state") {
    for (int c = 1; c <= 6; ++c) {
        CAPTURE(c);
        const auto s = lln(preset(c));
        CHECK(std::abs(s.d_bar - 0.08) <= 1e-10);
        CHECK(std::abs(s.l_bar - 0.064) <= 1e-10);
    }
    CHECK_THROWS_AS(preset(0), DomainError);
    CHECK_THROWS_AS(preset(7), DomainError);
}

TEST_CASE("zero-default pool") {
    const PoolSpec spec({{1.0, 0.0, RecoveryModel::point_mass(0.4)}});
    const auto s = lln(spec);
    CHECK(s.d_bar == 0.0);
    CHECK(s.l_bar == 0.0);
}

TEST_CASE("weights are validated") {
    const auto pm = RecoveryModel::point_mass(0.2);
    CHECK_THROWS_AS(PoolSpec({{0.5, 0.08, pm}, {0.4, 0.08, pm}}), DomainError);
    CHECK_THROWS_AS(PoolSpec({{1.0, 1.2, pm}}), DomainError);
    CHECK_THROWS_AS(PoolSpec({{-0.5, 0.08, pm}, {1.5, 0.08, pm}}), DomainError);
    CHECK_THROWS_AS(PoolSpec(std::vector<TypeSpec>{}), DomainError);
    const PoolSpec ok({{1.0 / 3.0, 0.08, pm}, {2.0 / 3.0, 0.08, pm}});
    CHECK(ok[0].weight + ok[1].weight == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("largest-remainder allocation") {
    const auto a = allocate(preset(4), 25);
    REQUIRE(a.size() == 2);
    CHECK(a[0] == 8);
    CHECK(a[1] == 17);
    for (std::size_t n : {1u, 2u, 3u, 10u, 99u, 1000u}) {
        const auto b = allocate(preset(5), n);
        CHECK(b[0] + b[1] == n);
    }
    const PoolSpec three({{0.2, 0.1, RecoveryModel::point_mass(0.2)},
                          {0.3, 0.1, RecoveryModel::point_mass(0.2)},
                          {0.5, 0.1, RecoveryModel::point_mass(0.2)}});
    const auto c = allocate(three, 7);   // 1.4, 2.1, 3.5: the largest remainder gets the last name
    CHECK(c[0] == 1);
    CHECK(c[1] == 2);
    CHECK(c[2] == 4);
}

TEST_CASE("config round trip is exact") {
    for (int c = 1; c <= 6; ++c) {
        CAPTURE(c);
        const auto spec = preset(c);
        const std::string text = pool_config::serialize(spec);
        const auto back = pool_config::parse(text);
        CHECK(back == spec);
        CHECK(pool_config::serialize(back) == text);
        CHECK(pool_config::pool_hash(back) == pool_config::pool_hash(spec));
    }
    CHECK(pool_config::pool_hash(preset(5)) != pool_config::pool_hash(preset(6)));
    CHECK(pool_config::pool_hash(preset(1)).size() == 16);
}

TEST_CASE("config accepts rationals, inline tables and comments") {
    const auto spec = pool_config::parse(R"(# two types
[pool]

[[pool.types]]
weight = 1/3
default_prob = 0.08
recovery = { kind = "point_mass", r0 = 0.2 }   # fixed recovery

[[pool.types]]
weight = 2/3
default_prob = 0.08
recovery.kind = "beta_quadratic"
recovery.base = 0.2
recovery.slope = 0.1
recovery.curvature = 0.1
recovery.anchor = 0.08
recovery.nodes = 32
)");
    REQUIRE(spec.size() == 2);
    CHECK(spec[0].recovery.is_point_mass());
    CHECK(spec[0].weight == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(spec[1].recovery.quadrature_nodes() == 32);
    CHECK(spec[1].recovery.mean_recovery(0.58) == doctest::Approx(0.125));
}

namespace {

std::string config_error(const std::string& text) {
    try {
        pool_config::parse(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("config errors name the line") {
    const std::string head = "[pool]\n[[pool.types]]\nweight = 1\ndefault_prob = 0.08\n";
    CHECK(config_error(head + "recovery.kind = \"point_mass\"\nrecovery.r0 = abc\n").find("line 6") == 0);
    CHECK(config_error(head + "recovery.kind = \"nope\"\n").find("line 5") == 0);
    CHECK(config_error(head + "recovery.kind = \"point_mass\"\nrecovery.r0 = 0.2\nrecovery.slope = 1\n")
              .find("line 7") == 0);
    CHECK(config_error(head + "recovery.kind = \"point_mass\"\nrecovery.r0 = 0.2\ncolour = 1\n").find("line 7") == 0);
    CHECK(config_error(head + "weight = 2\n").find("line 5") == 0);
    CHECK(config_error("[[pool.types]]\n").find("line 1") == 0);
    CHECK(config_error(head + "recovery.kind = \"point_mass\"\n").find("r0") != std::string::npos);
    CHECK(!config_error(head + "recovery.kind = \"point_mass\"\nrecovery.r0 = 1.5\n").empty());
    CHECK(!config_error("[pool]\n").empty());
}
