#pragma once

#include <vector>

namespace coopnet::geometry {

// Link geometry of one cooperative cluster: the serving transmitters'
// distances to the user and the pathloss exponent. Units cancel — everything
// downstream works on the normalized ratios d_i / d_K.
struct ClusterGeometry {
  std::vector<double> distances;  // ascending, all positive
  double eta = 4.0;               // pathloss exponent, must exceed 2
};

// Throws std::domain_error unless distances is non-empty, positive and
// ascending, and eta > 2.
void validate(const ClusterGeometry& geometry);

// (d_i / d_K)^eta for each serving transmitter; ascending, last entry exactly
// 1. These are the decay weights of the per-branch exponential signal powers.
std::vector<double> normalized_pathloss(const ClusterGeometry& geometry);

// Per-transmitter probability of staying silent in a slot (battery empty or
// no channel access). q_i = 0 means the node transmits every slot.
struct InClusterAvailability {
  std::vector<double> q_list;
};

// Throws std::domain_error unless every q_i lies in [0, 1) and, when
// expected_size > 0, the list has exactly that many entries.
void validate(const InClusterAvailability& avail, int expected_size = 0);

// Probability that no in-cluster transmitter is active: the product of q_i.
double availability_product(const InClusterAvailability& avail);

// Element-wise weights / q_i, the decay set of the idle-censored signal sum.
// Throws std::domain_error when any q_i == 0 (callers must use the
// always-active limit form instead).
std::vector<double> idle_scaled_pathloss(const std::vector<double>& weights,
                                         const InClusterAvailability& avail);

// Unique values of a multiset together with their multiplicities, merging
// entries that are relatively closer than rel_tol.
struct MultiplicityGroups {
  std::vector<double> values;  // ascending representatives (group means)
  std::vector<int> counts;     // multiplicities, same length; sums to input size
};

MultiplicityGroups group_multiplicities(const std::vector<double>& values,
                                        double rel_tol = 1e-9);
MultiplicityGroups group_multiplicities(const ClusterGeometry& geometry,
                                        double rel_tol = 1e-9);

// Signed elementary-symmetric coefficients alpha_i = (-1)^i e_{K-i}(values),
// i = 0..K-1, built by the one-pass polynomial recurrence. These are the
// numerator coefficients of the partial-fraction expansion of
// prod_l v_l / (v_l + x).
std::vector<double> alpha_coefficients(const std::vector<double>& values);

}  // namespace coopnet::geometry
