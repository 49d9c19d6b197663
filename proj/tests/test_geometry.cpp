#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "coopnet/geometry.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using coopnet::geometry::alpha_coefficients;
using coopnet::geometry::availability_product;
using coopnet::geometry::ClusterGeometry;
using coopnet::geometry::group_multiplicities;
using coopnet::geometry::idle_scaled_pathloss;
using coopnet::geometry::InClusterAvailability;
using coopnet::geometry::MultiplicityGroups;
using coopnet::geometry::normalized_pathloss;

TEST_SUITE("geometry") {

TEST_CASE("normalized pathloss weights") {
  const auto w = normalized_pathloss({{5.0, 10.0, 10.0, 10.0}, 4.0});
  REQUIRE(w.size() == 4);
  CHECK(w[0] == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(w[1] == 1.0);
  CHECK(w[2] == 1.0);
  CHECK(w[3] == 1.0);
  // Scale invariance: only ratios matter.
  const auto a = normalized_pathloss({{10.0, 12.0, 14.0, 16.0}, 3.5});
  const auto b = normalized_pathloss({{5.0, 6.0, 7.0, 8.0}, 3.5});
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-15));
  }
}

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(normalized_pathloss({{}, 4.0}), std::domain_error);
  CHECK_THROWS_AS(normalized_pathloss({{-1.0, 2.0}, 4.0}), std::domain_error);
  CHECK_THROWS_AS(normalized_pathloss({{3.0, 2.0}, 4.0}), std::domain_error);
  CHECK_THROWS_AS(normalized_pathloss({{1.0, 2.0}, 2.0}), std::domain_error);
}

TEST_CASE("multiplicity grouping") {
  const auto g = group_multiplicities({{5.0, 10.0, 10.0, 10.0}, 4.0});
  REQUIRE(g.values.size() == 2);
  CHECK(g.values[0] == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK(g.values[1] == 1.0);
  CHECK(g.counts[0] == 1);
  CHECK(g.counts[1] == 3);

  const auto distinct = group_multiplicities({{10.0, 12.0, 14.0, 16.0}, 4.0});
  CHECK(distinct.values.size() == 4);
  for (int n : distinct.counts) {
    CHECK(n == 1);
  }

  const auto single = group_multiplicities(ClusterGeometry{{7.0}, 4.0});
  CHECK(single.values == std::vector<double>{1.0});
  CHECK(single.counts == std::vector<int>{1});
}

TEST_CASE("grouping is order-invariant and idempotent") {
  const std::vector<double> values = {1.0, 0.2, 0.2 + 1e-11, 0.6, 1.0 - 1e-12};
  const std::vector<double> shuffled = {0.6, 1.0 - 1e-12, 0.2, 1.0, 0.2 + 1e-11};
  const auto a = group_multiplicities(values);
  const auto b = group_multiplicities(shuffled);
  REQUIRE(a.values.size() == 3);
  CHECK(a.values == b.values);
  CHECK(a.counts == b.counts);
  const auto again = group_multiplicities(a.values);
  CHECK(again.values == a.values);
  int total = 0;
  for (int n : a.counts) {
    total += n;
  }
  CHECK(total == 5);
  // Wider tolerance merges near-misses.
  const auto snapped = group_multiplicities({0.2, 0.2 * (1.0 + 1e-7), 1.0}, 1e-6);
  CHECK(snapped.values.size() == 2);
  CHECK(snapped.counts[0] == 2);
}

TEST_CASE("alpha coefficients at pinned points") {
  const auto a3 = alpha_coefficients({1.0, 2.0, 3.0});
  REQUIRE(a3.size() == 3);
  CHECK(a3[0] == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(a3[1] == doctest::Approx(-11.0).epsilon(1e-15));
  CHECK(a3[2] == doctest::Approx(6.0).epsilon(1e-15));

  const auto a1 = alpha_coefficients({0.37});
  CHECK(a1 == std::vector<double>{0.37});

  const double v = 1.7;
  const auto rep = alpha_coefficients({v, v, v});
  CHECK(rep[0] == doctest::Approx(v * v * v).epsilon(1e-15));
  CHECK(rep[1] == doctest::Approx(-3.0 * v * v).epsilon(1e-15));
  CHECK(rep[2] == doctest::Approx(3.0 * v).epsilon(1e-15));
}

TEST_CASE("alpha coefficients match subset enumeration up to K=8") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> unif(0.05, 4.0);
  for (int k = 1; k <= 8; ++k) {
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> values(k);
      for (double& v : values) {
        v = unif(gen);
      }
      const auto got = alpha_coefficients(values);
      const auto want = oracles::alpha_by_enumeration(values);
      for (int i = 0; i < k; ++i) {
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("partial-fraction identity at the poles") {
  // sum_i alpha_i v^i at v = v_j collapses to (-1)^{K-1} v_j^K because the
  // full characteristic polynomial prod_l (v_l - x) vanishes there.
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(0.1, 3.0);
  for (int k = 1; k <= 6; ++k) {
    std::vector<double> values(k);
    for (double& v : values) {
      v = unif(gen);
    }
    const auto alpha = alpha_coefficients(values);
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    for (double vj : values) {
      double sum = 0.0;
      double power = 1.0;
      for (int i = 0; i < k; ++i) {
        sum += alpha[i] * power;
        power *= vj;
      }
      CHECK(sum == doctest::Approx(sign * std::pow(vj, k)).epsilon(1e-10));
    }
  }
}

TEST_CASE("availability product") {
  CHECK(availability_product({{0.5, 0.5, 0.5}}) ==
        doctest::Approx(0.125).epsilon(1e-15));
  CHECK(availability_product({{0.37}}) == doctest::Approx(0.37));
  CHECK(availability_product({{0.0, 0.9}}) == 0.0);
  CHECK_THROWS_AS(availability_product({{1.0}}), std::domain_error);
  CHECK_THROWS_AS(availability_product({{-0.1}}), std::domain_error);
  CHECK_THROWS_AS(availability_product({{}}), std::domain_error);
}

TEST_CASE("idle-scaled weights") {
  const auto scaled = idle_scaled_pathloss({0.0625, 1.0}, {{0.5, 0.25}});
  CHECK(scaled[0] == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(scaled[1] == doctest::Approx(4.0).epsilon(1e-15));
  // Scaled weights dominate the originals element-wise.
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    CHECK(scaled[i] >= std::vector<double>{0.0625, 1.0}[i]);
  }
  CHECK_THROWS_AS(idle_scaled_pathloss({1.0}, {{0.0}}), std::domain_error);
  CHECK_THROWS_AS(idle_scaled_pathloss({1.0, 2.0}, {{0.5}}), std::domain_error);
}

}  // TEST_SUITE
