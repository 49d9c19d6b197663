#pragma once

#include <cstdint>
#include <vector>

#include "coopnet/rng.hpp"

namespace coopnet::energy {

// Per-node energy-harvesting configuration. Each slot, one unit of energy
// arrives with probability rho and is stored in a buffer holding at most
// buffer_size units (arrivals to a full buffer are lost). A node holding at
// least one unit gets channel access with probability p_ch and then transmits,
// spending one unit.
struct EnergyProfile {
  double rho = 0.5;        // per-slot energy-arrival probability
  int buffer_size = 1;     // storage capacity in energy units
  double p_ch = 1.0;       // channel-access probability
  int tx_power_units = 1;  // units spent per transmission; only 1 is supported
};

// Throws std::domain_error unless 0 < rho <= 1, 0 < p_ch <= 1,
// buffer_size >= 1 and tx_power_units == 1.
void validate(const EnergyProfile& profile);

// Steady-state probability that the buffer is non-empty at the start of a
// slot.
double steady_state_availability(const EnergyProfile& profile);

// Unconditional per-slot transmission probability:
// p_ch * steady_state_availability.
double transmission_probability(const EnergyProfile& profile);

// Limit of transmission_probability as buffer_size grows without bound:
// min(rho, p_ch).
double infinite_buffer_limit(const EnergyProfile& profile);

// Stationary distribution over buffer levels 0..buffer_size at slot start.
std::vector<double> stationary_distribution(const EnergyProfile& profile);

struct BufferTrajectoryStats {
  std::uint64_t slots = 0;
  double availability_freq = 0.0;  // fraction of slot-starts with energy
  double tx_freq = 0.0;            // fraction of slots with a transmission
};

// Slot-by-slot trajectory starting from an empty buffer; a burn-in prefix is
// discarded before statistics are collected. Per slot, in order: record
// availability (level >= 1); if available, transmit with probability p_ch,
// spending one unit; harvest one unit with probability rho unless full.
// Deterministic for a fixed seed; each call owns an isolated generator, so
// concurrent calls are safe.
BufferTrajectoryStats simulate_buffer(const EnergyProfile& profile,
                                      std::uint64_t slots, std::uint64_t seed);

// Drives one buffer chain from empty through burn_in warm-up slots using the
// caller's random source, then reports whether the node transmits in the slot
// that follows. Same slot dynamics as simulate_buffer; this is the
// trajectory-accurate way to draw a single activity indicator.
bool transmit_after_burn_in(const EnergyProfile& profile, TrialRng& rng,
                            int burn_in = 10000);

}  // namespace coopnet::energy
