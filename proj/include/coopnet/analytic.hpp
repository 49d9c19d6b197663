#pragma once

#include <vector>

#include "coopnet/geometry.hpp"
#include "coopnet/model.hpp"

namespace coopnet::analytic {

// A success-probability curve over a grid of SINR thresholds (linear scale).
struct CcdfCurve {
  std::vector<double> thresholds;
  std::vector<double> values;
};

// CCDF at x of the idle-censored combined signal power: each branch i
// contributes an Exp(omega_i^eta) variate with probability 1 - q_i and
// nothing otherwise. Computed through the partial-fraction mixture form.
// Throws std::domain_error when any q_i == 0 (the scaled decay set is
// undefined there; use the always-active hypoexponential limit instead).
double sk_ccdf(const geometry::ClusterGeometry& geometry,
               const geometry::InClusterAvailability& avail, double x);

// Partial-fraction coefficient A_m for grouped decay values: group index u
// (0-based), order v in 1..counts[u]. Enumerate compositions of
// counts[u] - v across groups.
double partial_fraction_coeff(int m, const geometry::MultiplicityGroups& groups,
                              int u, int v);

// Link success probability for a conditioned cluster geometry, handling
// repeated distances through multiplicity groups and a sharp exponential
// bound on each Gamma-order tail. Result clamped to [0, 1]; when `clamped`
// is non-null it reports whether clamping moved the value.
double link_ccdf_theorem1(const NetworkModel& model,
                          const geometry::ClusterGeometry& geometry,
                          double theta, bool* clamped = nullptr);

// Exact link success probability for strictly distinct distances (relative
// gaps above 1e-6 after grouping); throws std::domain_error otherwise —
// callers should route near-degenerate geometries to link_ccdf_theorem1.
double link_ccdf_prop1(const NetworkModel& model,
                       const geometry::ClusterGeometry& geometry, double theta);

// Interference-limited link success probability averaged over the serving
// cluster scale, for a normalized geometry omega (ascending, last entry 1)
// and one common idle probability q_tr. model.noise is ignored;
// model.out_cluster_tx_prob is implied by 1 - q_tr. Repeated omega entries
// are perturbed by 1e-6 relative (warning on stderr).
double link_ccdf_theorem2(const NetworkModel& model,
                          const std::vector<double>& omega, double q_tr,
                          double theta);

// Probability that a typical user wins the competition for its cluster:
// truncated series form (non-cooperative case only) and the fitted
// closed form for any cluster size.
double cluster_access_series(double beta, int max_terms = 500);
double cluster_access_approx(int cluster_size, double beta);

// Joint probability of winning the cluster and decoding at threshold theta;
// the access competition enters as a shift inside the averaged tail.
double overall_success_theorem3(const NetworkModel& model,
                                const std::vector<double>& omega, double q_tr,
                                double theta);

// Probability that no in-cluster transmitter is active (the outage level
// every curve approaches as theta -> 0).
double asymptotic_outage(const geometry::InClusterAvailability& avail);

// Outage probability in the infinite-buffer limit, where every idle
// probability tends to 1 - rho. Requires rho < p_ch (otherwise the buffer
// saturates and the floor is governed by p_ch, not rho: substitute
// q_tr = 1 - p_ch in link_ccdf_theorem2 instead).
double outage_floor_infinite_buffer(const NetworkModel& model,
                                    const std::vector<double>& omega,
                                    double rho, double p_ch, double theta);

// Laplace transform at s of the shot-noise interference from a field of
// intensity intensity_eff, per-node power `power`, outside a guard radius
// (guard_radius == 0 means no exclusion).
double interference_laplace(double s, double intensity_eff, double power,
                            double guard_radius, double eta);

// Density and CDF of the distance to the k-th nearest point of a field with
// effective intensity intensity_eff.
double kth_neighbor_pdf(double r, double intensity_eff, int k);
double kth_neighbor_cdf(double r, double intensity_eff, int k);

}  // namespace coopnet::analytic
