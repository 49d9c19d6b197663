#pragma once

#include <vector>

#include "coopnet/geometry.hpp"

namespace coopnet {

// One tier of co-channel interferers laid out independently of the serving
// tier; its nodes are never part of any serving cluster.
struct TierConfig {
  double intensity = 0.0;  // nodes per unit area
  double tx_prob = 1.0;    // per-slot transmit probability, in (0, 1]
  double power = 1.0;      // transmit power relative to a serving-tier node
};

// Field-level description of the network surrounding the typical user.
struct NetworkModel {
  double tx_intensity = 0.01;        // serving-tier node density
  double rx_intensity = 0.01;        // user density
  double eta = 4.0;                  // pathloss exponent, must exceed 2
  double noise = 0.0;                // receiver noise power (linear, with a
                                     // serving-tier transmitter at unit power)
  double out_cluster_tx_prob = 0.5;  // per-slot transmit probability of
                                     // serving-tier nodes outside the cluster
  std::vector<TierConfig> tiers;     // interfering co-channel tiers
  geometry::InClusterAvailability in_cluster;  // per-serving-TX idle probs
};

// Throws std::domain_error on an invalid field (densities, eta, noise,
// probabilities, tier entries). in_cluster is validated by the operations
// that use it, against the cluster size at hand.
void validate(const NetworkModel& model);

}  // namespace coopnet
