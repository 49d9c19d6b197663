#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "coopnet/energy.hpp"
#include "coopnet/geometry.hpp"
#include "coopnet/model.hpp"

namespace coopnet::mcsim {

// Which point process the receiver clusters with: the full transmitter
// process, or the process thinned to its currently-transmitting subset. The
// distance-averaged analytic forms use the thinned law.
enum class ClusterSource { full_process, thinned_process };

struct SimConfig {
  std::uint64_t trials = 10000;
  // Floor on every outer truncation radius. 0 leaves sizing entirely to the
  // built-in rule: the expected truncated interference tail stays below 1e-3
  // of the in-window mean, and the window spans at least five guard radii.
  // Doubling this past the automatic radius is how truncation bias is probed.
  double window_radius = 0.0;
  std::vector<double> theta_grid = {1.0};
  std::uint64_t master_seed = 1;
  ClusterSource cluster_source = ClusterSource::thinned_process;
  // true: activity indicators are stationary Bernoulli(p_tr) draws;
  // false: each in-cluster node runs its buffer chain through burn-in first.
  bool steady_state_indicators = true;
};

// Throws std::domain_error on an empty/descending/negative theta grid or
// zero trials.
void validate(const SimConfig& config);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct EmpiricalEstimate {
  std::vector<double> theta_grid;
  std::vector<double> success_freq;
  std::vector<double> ci_low;   // 99% Wilson lower bounds
  std::vector<double> ci_high;  // 99% Wilson upper bounds
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

struct ProbabilityEstimate {
  double freq = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

// 99% Wilson score interval for a binomial frequency.
std::pair<double, double> wilson99(std::uint64_t successes,
                                   std::uint64_t trials);

// Homogeneous Poisson sample on a disk of the given radius centered at the
// origin. Deterministic per seed.
std::vector<Point> sample_ppp(double intensity, double window_radius,
                              std::uint64_t seed);

// Per-trial success frequency of the conditioned link: the cluster geometry
// is fixed, in-cluster activity follows the indicator policy, fading is
// fresh Rayleigh, and interference sums the co-tier field beyond the cluster
// edge plus every unshielded tier. In trajectory mode (steady_state_indicators
// false) `profiles` must carry one energy profile per cluster element and
// model.in_cluster is not consulted; in steady-state mode `profiles` is
// ignored. Bit-identical results for a fixed config regardless of thread
// schedule.
EmpiricalEstimate simulate_link_ccdf(
    const NetworkModel& model, const geometry::ClusterGeometry& geometry,
    const SimConfig& config,
    const std::vector<energy::EnergyProfile>& profiles = {});

// Distance-averaged variant: the cluster edge distance is redrawn every trial
// from the K-th neighbor law of the cluster-source process, the normalized
// geometry omega is held fixed, and every node shares idling probability
// q_tr. Steady-state indicators only.
EmpiricalEstimate simulate_link_ccdf_normalized(const NetworkModel& model,
                                                const std::vector<double>& omega,
                                                double q_tr,
                                                const SimConfig& config);

// Cluster-access competition: realize transmitter and user fields, find the
// typical user's K nearest transmitters, count users whose own K-nearest set
// is exactly the same set, and select one of them uniformly.
ProbabilityEstimate simulate_cluster_access(const NetworkModel& model,
                                            int cluster_size, double q_tr,
                                            const SimConfig& config);

// Joint event per trial: the typical user wins the access competition AND its
// link (at the fixed normalized geometry, edge distance taken from the
// realized cluster) clears each threshold.
EmpiricalEstimate simulate_overall_success(const NetworkModel& model,
                                           const std::vector<double>& omega,
                                           double q_tr,
                                           const SimConfig& config);

// Sample mean of exp(-s I) where I is shot noise of the given effective
// intensity and per-point power beyond guard_radius. Validates the
// closed-form transform.
MeanEstimate empirical_laplace(double intensity_eff, double power,
                               double guard_radius, double eta, double s,
                               const SimConfig& config);

// Distances from the origin to the k-th nearest point of a homogeneous PPP,
// one per sample, obtained by realizing the process (not by inverting the
// target law).
std::vector<double> sample_kth_neighbor_distances(double intensity, int k,
                                                  std::uint64_t count,
                                                  std::uint64_t seed);

}  // namespace coopnet::mcsim
