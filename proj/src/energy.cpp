#include "coopnet/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coopnet/rng.hpp"

namespace coopnet::energy {

void validate(const EnergyProfile& profile) {
  if (!(profile.rho > 0.0) || !(profile.rho <= 1.0)) {
    throw std::domain_error("EnergyProfile: rho must lie in (0, 1]");
  }
  if (!(profile.p_ch > 0.0) || !(profile.p_ch <= 1.0)) {
    throw std::domain_error("EnergyProfile: p_ch must lie in (0, 1]");
  }
  if (profile.buffer_size < 1) {
    throw std::domain_error("EnergyProfile: buffer_size must be >= 1");
  }
  if (profile.tx_power_units != 1) {
    throw std::domain_error(
        "EnergyProfile: only tx_power_units == 1 is supported");
  }
}

double steady_state_availability(const EnergyProfile& profile) {
  validate(profile);
  const double rho = profile.rho;
  const double p_ch = profile.p_ch;
  const double s = static_cast<double>(profile.buffer_size);
  if (rho == 1.0) {
    // Energy arrives every slot; the buffer can never drain to empty.
    return 1.0;
  }
  if (rho == p_ch) {
    return s / (s + 1.0 - rho);
  }
  // Birth-death chain with up-rate rho(1-p_ch), down-rate p_ch(1-rho) above
  // level 0 and up-rate rho at level 0. Let a = rho/p_ch and r the up/down
  // ratio; the non-empty probability is a(1-r^S)/(1-a r^S). Both differences
  // are taken through expm1/log1p so nearly balanced chains (r ~ 1) and deep
  // buffers (r^S overflowing either way) stay accurate.
  const double a = rho / p_ch;
  const double dr = (rho - p_ch) / (p_ch * (1.0 - rho));  // r - 1, exact sign
  const double slog = s * std::log1p(dr);
  if (slog <= 0.0) {
    const double num = a * (-std::expm1(slog));        // a (1 - r^S)
    const double den = (p_ch - rho) / p_ch + num;      // (1-a) + a (1-r^S)
    return num / den;
  }
  // r > 1: divide through by r^S so nothing overflows.
  const double u1 = std::expm1(-slog);                 // r^{-S} - 1, in (-1,0)
  return a * u1 / (u1 + (p_ch - rho) / p_ch);
}

double transmission_probability(const EnergyProfile& profile) {
  return profile.p_ch * steady_state_availability(profile);
}

double infinite_buffer_limit(const EnergyProfile& profile) {
  validate(profile);
  return std::min(profile.rho, profile.p_ch);
}

std::vector<double> stationary_distribution(const EnergyProfile& profile) {
  validate(profile);
  const int size = profile.buffer_size;
  std::vector<double> pi(static_cast<std::size_t>(size) + 1, 0.0);
  if (profile.rho == 1.0) {
    pi.back() = 1.0;
    return pi;
  }
  // Unnormalized weights: w_0 = 1, w_l = b r^{l-1} with b the level-0 escape
  // ratio. Assembled in log space so steep chains in either direction survive.
  const double log_b = std::log(profile.rho) - std::log(profile.p_ch) -
                       std::log1p(-profile.rho);
  const double log_r =
      std::log1p((profile.rho - profile.p_ch) / (profile.p_ch * (1.0 - profile.rho)));
  std::vector<double> logw(pi.size());
  logw[0] = 0.0;
  for (int level = 1; level <= size; ++level) {
    logw[static_cast<std::size_t>(level)] = log_b + (level - 1) * log_r;
  }
  const double peak = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    pi[i] = std::exp(logw[i] - peak);
    total += pi[i];
  }
  for (double& p : pi) {
    p /= total;
  }
  return pi;
}

BufferTrajectoryStats simulate_buffer(const EnergyProfile& profile,
                                      std::uint64_t slots, std::uint64_t seed) {
  validate(profile);
  if (slots < 1) {
    throw std::invalid_argument("simulate_buffer: slots must be >= 1");
  }
  constexpr std::uint64_t kBurnIn = 10000;
  constexpr std::uint64_t kStream = 0x62756666;  // distinct from network sims
  TrialRng rng(seed, kStream, 0);
  int level = 0;
  std::uint64_t available = 0;
  std::uint64_t transmitted = 0;
  for (std::uint64_t t = 0; t < kBurnIn + slots; ++t) {
    const bool counted = t >= kBurnIn;
    if (level >= 1) {
      if (counted) {
        ++available;
      }
      if (rng.bernoulli(profile.p_ch)) {
        --level;
        if (counted) {
          ++transmitted;
        }
      }
    }
    if (level < profile.buffer_size && rng.bernoulli(profile.rho)) {
      ++level;
    }
  }
  BufferTrajectoryStats stats;
  stats.slots = slots;
  stats.availability_freq =
      static_cast<double>(available) / static_cast<double>(slots);
  stats.tx_freq =
      static_cast<double>(transmitted) / static_cast<double>(slots);
  return stats;
}

bool transmit_after_burn_in(const EnergyProfile& profile, TrialRng& rng,
                            int burn_in) {
  validate(profile);
  if (burn_in < 0) {
    throw std::invalid_argument("transmit_after_burn_in: burn_in must be >= 0");
  }
  int level = 0;
  for (int t = 0; t < burn_in; ++t) {
    if (level >= 1 && rng.bernoulli(profile.p_ch)) {
      --level;
    }
    if (level < profile.buffer_size && rng.bernoulli(profile.rho)) {
      ++level;
    }
  }
  return level >= 1 && rng.bernoulli(profile.p_ch);
}

}  // namespace coopnet::energy
