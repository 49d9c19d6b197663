#include <cmath>
#include <stdexcept>

#include "coopnet/energy.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using coopnet::energy::BufferTrajectoryStats;
using coopnet::energy::EnergyProfile;
using coopnet::energy::infinite_buffer_limit;
using coopnet::energy::simulate_buffer;
using coopnet::energy::stationary_distribution;
using coopnet::energy::steady_state_availability;
using coopnet::energy::transmission_probability;

namespace {
EnergyProfile profile(double rho, int s, double p_ch) {
  return EnergyProfile{rho, s, p_ch, 1};
}
}  // namespace

TEST_SUITE("energy") {

TEST_CASE("closed-form availability at frozen points") {
  // Single-slot buffer: rho / (rho + p_ch - rho p_ch).
  CHECK(steady_state_availability(profile(0.5, 1, 0.5)) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  // Two-slot buffer, exact rational 105/121.
  CHECK(steady_state_availability(profile(0.75, 2, 0.8)) ==
        doctest::Approx(0.8677685950413223).epsilon(1e-15));
  CHECK(transmission_probability(profile(0.75, 2, 0.8)) ==
        doctest::Approx(0.6942148760330578).epsilon(1e-15));
  CHECK(transmission_probability(profile(0.5, 2, 0.8)) ==
        doctest::Approx(0.4878048780487805).epsilon(1e-15));
  // Balanced chain: S / (S + 1 - rho).
  CHECK(steady_state_availability(profile(0.8, 4, 0.8)) ==
        doctest::Approx(4.0 / 4.2).epsilon(1e-15));
  // Guaranteed arrivals keep the buffer non-empty forever.
  CHECK(steady_state_availability(profile(1.0, 3, 0.6)) == 1.0);
  // Guaranteed channel access drains every unit immediately: availability
  // equals the arrival probability regardless of capacity.
  CHECK(steady_state_availability(profile(0.3, 5, 1.0)) ==
        doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("closed form matches power-iteration oracle across regimes") {
  const double rhos[] = {0.2, 0.5, 0.75, 0.8, 0.8 + 1e-8, 0.99};
  const int sizes[] = {1, 2, 5, 17, 100};
  const double access[] = {0.5, 0.8, 1.0};
  for (double rho : rhos) {
    for (int s : sizes) {
      for (double p_ch : access) {
        const auto pi =
            oracles::buffer_stationary_by_power_iteration(rho, s, p_ch);
        const double want = 1.0 - pi[0];
        CHECK(steady_state_availability(profile(rho, s, p_ch)) ==
              doctest::Approx(want).epsilon(5e-11));
      }
    }
  }
}

TEST_CASE("stationary distribution is a distribution and matches the oracle") {
  for (double rho : {0.3, 0.75, 0.99}) {
    for (int s : {1, 4, 100}) {
      const auto got = stationary_distribution(profile(rho, s, 0.6));
      REQUIRE(got.size() == static_cast<std::size_t>(s) + 1);
      double total = 0.0;
      for (double p : got) {
        CHECK(p >= 0.0);
        total += p;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(1.0 - got[0] ==
            doctest::Approx(steady_state_availability(profile(rho, s, 0.6)))
                .epsilon(1e-12));
      const auto want =
          oracles::buffer_stationary_by_power_iteration(rho, s, 0.6);
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-8).scale(1.0));
      }
    }
  }
}

TEST_CASE("deep buffers flatten toward the infinite-buffer limit") {
  for (auto [rho, p_ch] : {std::pair{0.3, 0.8}, {0.75, 0.5}, {0.99, 0.5},
                           {0.2, 0.9}}) {
    const double lim = infinite_buffer_limit(profile(rho, 1, p_ch));
    CHECK(lim == doctest::Approx(std::min(rho, p_ch)).epsilon(1e-15));
    CHECK(transmission_probability(profile(rho, 200, p_ch)) ==
          doctest::Approx(lim).epsilon(1e-4));
  }
}

TEST_CASE("availability grows with capacity and with arrivals") {
  double prev = 0.0;
  for (int s = 1; s <= 30; ++s) {
    const double cur = steady_state_availability(profile(0.6, s, 0.7));
    CHECK(cur >= prev);
    prev = cur;
  }
  prev = 0.0;
  for (int i = 1; i <= 19; ++i) {
    const double cur = steady_state_availability(profile(0.05 * i, 3, 0.7));
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("trajectory simulation reproduces the closed form") {
  const auto stats = simulate_buffer(profile(0.75, 2, 0.8), 1000000, 42);
  CHECK(stats.slots == 1000000);
  CHECK(std::fabs(stats.availability_freq - 0.8677685950413223) <= 2e-3);
  CHECK(std::fabs(stats.tx_freq - 0.6942148760330578) <= 2e-3);
  // Guaranteed arrivals: available every slot, transmit at the access rate.
  const auto full = simulate_buffer(profile(1.0, 1, 0.8), 1000000, 7);
  CHECK(full.availability_freq == 1.0);
  CHECK(std::fabs(full.tx_freq - 0.8) <= 2e-3);
}

TEST_CASE("trajectory simulation is deterministic per seed") {
  const auto a = simulate_buffer(profile(0.5, 3, 0.6), 20000, 123);
  const auto b = simulate_buffer(profile(0.5, 3, 0.6), 20000, 123);
  const auto c = simulate_buffer(profile(0.5, 3, 0.6), 20000, 124);
  CHECK(a.availability_freq == b.availability_freq);
  CHECK(a.tx_freq == b.tx_freq);
  CHECK(a.availability_freq != c.availability_freq);
}

TEST_CASE("invalid profiles are rejected") {
  CHECK_THROWS_AS(steady_state_availability(profile(0.0, 1, 0.5)),
                  std::domain_error);
  CHECK_THROWS_AS(steady_state_availability(profile(1.2, 1, 0.5)),
                  std::domain_error);
  CHECK_THROWS_AS(steady_state_availability(profile(0.5, 0, 0.5)),
                  std::domain_error);
  CHECK_THROWS_AS(steady_state_availability(profile(0.5, 1, 0.0)),
                  std::domain_error);
  CHECK_THROWS_AS(
      steady_state_availability(EnergyProfile{0.5, 1, 0.5, 2}),
      std::domain_error);
}

}  // TEST_SUITE
