#include "coopnet/mcsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "coopnet/rng.hpp"

namespace coopnet::mcsim {

namespace {

constexpr std::uint64_t kChunk = 1024;

// Stream tags keep every estimator on its own seed lane; changing one
// simulation can never shift the draws of another.
constexpr std::uint64_t kStreamPpp = 0x70703030;
constexpr std::uint64_t kStreamLink = 0x6C696E6B;
constexpr std::uint64_t kStreamNorm = 0x6E6F726D;
constexpr std::uint64_t kStreamAccess = 0x61636365;
constexpr std::uint64_t kStreamOverall = 0x6F766572;
constexpr std::uint64_t kStreamLaplace = 0x6C617063;
constexpr std::uint64_t kStreamNeighbor = 0x6E656172;

constexpr int kTrajectoryBurnIn = 10000;

// Runs chunk_fn(chunk_index, first_trial, end_trial) over fixed 1024-trial
// chunks. Every chunk writes only chunk-indexed storage and every trial owns
// its own substream, so results are bit-identical no matter how many workers
// pick up the chunks or in which order.
void run_chunks(std::uint64_t trials,
                const std::function<void(std::uint64_t, std::uint64_t,
                                         std::uint64_t)>& chunk_fn) {
  const std::uint64_t chunk_count = (trials + kChunk - 1) / kChunk;
  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(
      std::max(1u, std::thread::hardware_concurrency()), chunk_count));
  std::atomic<std::uint64_t> next{0};
  const auto drain = [&]() {
    while (true) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= chunk_count) {
        return;
      }
      chunk_fn(c, c * kChunk, std::min(trials, (c + 1) * kChunk));
    }
  };
  if (workers <= 1) {
    drain();
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back(drain);
  }
  for (std::thread& worker : pool) {
    worker.join();
  }
}

// Outer truncation radius for interference beyond a guard distance. The
// growth factor keeps the expected truncated tail below 1e-3 of the in-window
// mean (ratio (R/g)^{2-eta} < 1e-3) and never drops below five guard radii.
double outer_radius(double guard, double eta, double floor_radius) {
  const double growth = std::max(5.0, std::pow(1001.0, 1.0 / (eta - 2.0)));
  return std::max(guard * growth, floor_radius);
}

// Shot-noise power of a Poisson field on the annulus [guard, outer] with
// unit-mean fading per point. Radii are all the pathloss needs, so positions
// are sampled as squared radii uniform in area.
double annulus_interference(TrialRng& rng, double intensity_eff, double power,
                            double guard, double outer, double eta) {
  if (intensity_eff <= 0.0 || outer <= guard) {
    return 0.0;
  }
  const double g2 = guard * guard;
  const double span = outer * outer - g2;
  const std::uint64_t points = rng.poisson(intensity_eff * M_PI * span);
  double total = 0.0;
  for (std::uint64_t i = 0; i < points; ++i) {
    const double r2 = g2 + rng.u01() * span;
    total += rng.exponential() * power * std::pow(r2, -0.5 * eta);
  }
  return total;
}

void record_successes(double signal, double denom,
                      const std::vector<double>& grid, std::uint64_t* counts) {
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (signal > grid[j] * denom) {
      ++counts[j];
    }
  }
}

// Chunk-indexed success counting over the threshold grid; reduced
// sequentially so the totals never depend on the schedule.
std::vector<std::uint64_t> count_successes(
    const SimConfig& config,
    const std::function<void(std::uint64_t, TrialRng&, std::uint64_t*)>&
        trial_fn,
    std::uint64_t stream) {
  const std::size_t width = config.theta_grid.size();
  const std::uint64_t chunk_count = (config.trials + kChunk - 1) / kChunk;
  std::vector<std::uint64_t> storage(chunk_count * width, 0);
  run_chunks(config.trials, [&](std::uint64_t c, std::uint64_t lo,
                                std::uint64_t hi) {
    std::uint64_t* mine = storage.data() + c * width;
    for (std::uint64_t t = lo; t < hi; ++t) {
      TrialRng rng(config.master_seed, stream, t);
      trial_fn(t, rng, mine);
    }
  });
  std::vector<std::uint64_t> totals(width, 0);
  for (std::uint64_t c = 0; c < chunk_count; ++c) {
    for (std::size_t j = 0; j < width; ++j) {
      totals[j] += storage[c * width + j];
    }
  }
  return totals;
}

EmpiricalEstimate assemble(const SimConfig& config,
                           const std::vector<std::uint64_t>& counts) {
  EmpiricalEstimate est;
  est.theta_grid = config.theta_grid;
  est.trials = config.trials;
  est.seed = config.master_seed;
  est.success_freq.reserve(counts.size());
  est.ci_low.reserve(counts.size());
  est.ci_high.reserve(counts.size());
  for (std::uint64_t c : counts) {
    est.success_freq.push_back(static_cast<double>(c) /
                               static_cast<double>(config.trials));
    const auto [lo, hi] = wilson99(c, config.trials);
    est.ci_low.push_back(lo);
    est.ci_high.push_back(hi);
  }
  return est;
}

void check_q_tr(double q_tr) {
  if (!(q_tr >= 0.0 && q_tr < 1.0)) {
    throw std::domain_error("q_tr must lie in [0, 1)");
  }
}

void check_omega(const std::vector<double>& omega) {
  if (omega.empty()) {
    throw std::domain_error("omega must be non-empty");
  }
  double prev = 0.0;
  for (double w : omega) {
    if (!(w > 0.0) || w < prev) {
      throw std::domain_error("omega entries must be positive and ascending");
    }
    prev = w;
  }
  if (std::fabs(omega.back() - 1.0) > 1e-12) {
    throw std::domain_error("omega must be normalized: last entry 1");
  }
}

struct TxPoint {
  double x;
  double y;
  double r2;  // squared distance to the origin
};

// Realizes the competition field and counts the users sharing the typical
// user's K-nearest transmitter set. Returns false when the window holds fewer
// than K transmitters (practically impossible at the sized windows). On
// success fills the sorted field, its radius, the squared cluster edge
// distance, and the candidate count (the typical user included).
bool competition_trial(TrialRng& rng, int k, double field_intensity,
                       double user_intensity, double floor_radius,
                       std::vector<TxPoint>& field, double* field_radius,
                       double* edge2, std::uint64_t* candidates) {
  // Window sizing: r_tail bounds the K-th neighbor distance to deep-Poisson
  // tail probability, margin bounds how far a candidate user can sit from the
  // cluster edge (an empty ball of radius 3/sqrt(intensity) has probability
  // exp(-9 pi)).
  const double r_tail =
      std::sqrt((k + 10.0 * std::sqrt(static_cast<double>(k)) + 30.0) /
                (field_intensity * M_PI));
  const double margin = 3.0 / std::sqrt(field_intensity);
  const double user_cap = r_tail + margin;
  const double radius =
      std::max(2.0 * user_cap + r_tail + margin, floor_radius);
  *field_radius = radius;
  const std::uint64_t points =
      rng.poisson(field_intensity * M_PI * radius * radius);
  if (points < static_cast<std::uint64_t>(k)) {
    return false;
  }
  field.clear();
  field.reserve(points);
  for (std::uint64_t i = 0; i < points; ++i) {
    const double r = radius * std::sqrt(rng.u01());
    const double angle = 2.0 * M_PI * rng.u01();
    field.push_back(TxPoint{r * std::cos(angle), r * std::sin(angle), r * r});
  }
  std::sort(field.begin(), field.end(),
            [](const TxPoint& a, const TxPoint& b) { return a.r2 < b.r2; });
  *edge2 = field[static_cast<std::size_t>(k) - 1].r2;
  // Users beyond edge + margin cannot share the cluster (they would need an
  // implausibly large transmitter-free ball around themselves).
  const double user_radius = std::min(std::sqrt(*edge2) + margin, user_cap);
  const std::uint64_t users =
      rng.poisson(user_intensity * M_PI * user_radius * user_radius);
  std::uint64_t sharing = 1;  // the typical user itself
  for (std::uint64_t u = 0; u < users; ++u) {
    const double r = user_radius * std::sqrt(rng.u01());
    const double angle = 2.0 * M_PI * rng.u01();
    const double ux = r * std::cos(angle);
    const double uy = r * std::sin(angle);
    double worst = 0.0;
    for (int i = 0; i < k; ++i) {
      const double dx = ux - field[static_cast<std::size_t>(i)].x;
      const double dy = uy - field[static_cast<std::size_t>(i)].y;
      worst = std::max(worst, dx * dx + dy * dy);
    }
    bool shares = true;
    // Scanning outward from the origin finds the disqualifying transmitter
    // almost immediately for non-candidates.
    for (std::size_t j = static_cast<std::size_t>(k); j < field.size(); ++j) {
      const double dx = ux - field[j].x;
      const double dy = uy - field[j].y;
      if (dx * dx + dy * dy < worst) {
        shares = false;
        break;
      }
    }
    if (shares) {
      ++sharing;
    }
  }
  *candidates = sharing;
  return true;
}

}  // namespace

void validate(const SimConfig& config) {
  if (config.trials < 1) {
    throw std::domain_error("SimConfig: trials must be >= 1");
  }
  if (!(config.window_radius >= 0.0) || !std::isfinite(config.window_radius)) {
    throw std::domain_error("SimConfig: window_radius must be finite and >= 0");
  }
  if (config.theta_grid.empty()) {
    throw std::domain_error("SimConfig: theta_grid must be non-empty");
  }
  double prev = -1.0;
  for (double theta : config.theta_grid) {
    if (!(theta >= 0.0) || theta < prev) {
      throw std::domain_error(
          "SimConfig: theta_grid must be nonnegative and ascending");
    }
    prev = theta;
  }
}

std::pair<double, double> wilson99(std::uint64_t successes,
                                   std::uint64_t trials) {
  if (trials == 0 || successes > trials) {
    throw std::domain_error("wilson99: need 0 <= successes <= trials, trials > 0");
  }
  constexpr double z = 2.5758293035489004;  // two-sided 99% normal quantile
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::vector<Point> sample_ppp(double intensity, double window_radius,
                              std::uint64_t seed) {
  if (!(intensity >= 0.0)) {
    throw std::domain_error("sample_ppp: intensity must be >= 0");
  }
  if (!(window_radius > 0.0)) {
    throw std::domain_error("sample_ppp: window_radius must be positive");
  }
  TrialRng rng(seed, kStreamPpp, 0);
  const std::uint64_t count =
      rng.poisson(intensity * M_PI * window_radius * window_radius);
  std::vector<Point> points;
  points.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double r = window_radius * std::sqrt(rng.u01());
    const double angle = 2.0 * M_PI * rng.u01();
    points.push_back(Point{r * std::cos(angle), r * std::sin(angle)});
  }
  return points;
}

EmpiricalEstimate simulate_link_ccdf(
    const NetworkModel& model, const geometry::ClusterGeometry& geometry,
    const SimConfig& config,
    const std::vector<energy::EnergyProfile>& profiles) {
  coopnet::validate(model);
  geometry::validate(geometry);
  validate(config);
  const std::size_t k = geometry.distances.size();
  const bool trajectory = !config.steady_state_indicators;
  std::vector<double> active_prob;
  if (trajectory) {
    if (profiles.size() != k) {
      throw std::domain_error(
          "simulate_link_ccdf: trajectory mode needs one energy profile per "
          "cluster element");
    }
    for (const energy::EnergyProfile& profile : profiles) {
      energy::validate(profile);
    }
  } else {
    geometry::validate(model.in_cluster, static_cast<int>(k));
    active_prob.reserve(k);
    for (double q : model.in_cluster.q_list) {
      active_prob.push_back(1.0 - q);
    }
  }
  std::vector<double> signal_decay;
  signal_decay.reserve(k);
  for (double d : geometry.distances) {
    signal_decay.push_back(std::pow(d, -model.eta));
  }
  const double guard = geometry.distances.back();
  const double outer = outer_radius(guard, model.eta, config.window_radius);
  const double out_intensity =
      model.out_cluster_tx_prob * model.tx_intensity;

  const auto trial = [&](std::uint64_t, TrialRng& rng, std::uint64_t* counts) {
    double signal = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const bool active =
          trajectory
              ? energy::transmit_after_burn_in(profiles[i], rng,
                                               kTrajectoryBurnIn)
              : rng.bernoulli(active_prob[i]);
      const double fade = rng.exponential();
      if (active) {
        signal += fade * signal_decay[i];
      }
    }
    double interference = annulus_interference(rng, out_intensity, 1.0, guard,
                                               outer, model.eta);
    for (const TierConfig& tier : model.tiers) {
      interference +=
          annulus_interference(rng, tier.tx_prob * tier.intensity, tier.power,
                               0.0, outer, model.eta);
    }
    record_successes(signal, interference + model.noise, config.theta_grid,
                     counts);
  };
  return assemble(config, count_successes(config, trial, kStreamLink));
}

EmpiricalEstimate simulate_link_ccdf_normalized(const NetworkModel& model,
                                                const std::vector<double>& omega,
                                                double q_tr,
                                                const SimConfig& config) {
  coopnet::validate(model);
  validate(config);
  check_omega(omega);
  check_q_tr(q_tr);
  if (!config.steady_state_indicators) {
    throw std::domain_error(
        "simulate_link_ccdf_normalized: trajectory indicators need per-node "
        "energy profiles; use the fixed-geometry overload");
  }
  const std::size_t k = omega.size();
  const double p_tr = 1.0 - q_tr;
  const double cluster_intensity =
      config.cluster_source == ClusterSource::thinned_process
          ? p_tr * model.tx_intensity
          : model.tx_intensity;
  const double out_intensity = p_tr * model.tx_intensity;

  const auto trial = [&](std::uint64_t, TrialRng& rng, std::uint64_t* counts) {
    // K-th neighbor law: lambda pi d_K^2 is Gamma(K, 1).
    double gamma_k = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      gamma_k += rng.exponential();
    }
    const double edge = std::sqrt(gamma_k / (cluster_intensity * M_PI));
    double signal = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const bool active = rng.bernoulli(p_tr);
      const double fade = rng.exponential();
      if (active) {
        signal += fade * std::pow(omega[i] * edge, -model.eta);
      }
    }
    const double outer = outer_radius(edge, model.eta, config.window_radius);
    double interference =
        annulus_interference(rng, out_intensity, 1.0, edge, outer, model.eta);
    for (const TierConfig& tier : model.tiers) {
      interference +=
          annulus_interference(rng, tier.tx_prob * tier.intensity, tier.power,
                               0.0, outer, model.eta);
    }
    record_successes(signal, interference + model.noise, config.theta_grid,
                     counts);
  };
  return assemble(config, count_successes(config, trial, kStreamNorm));
}

ProbabilityEstimate simulate_cluster_access(const NetworkModel& model,
                                            int cluster_size, double q_tr,
                                            const SimConfig& config) {
  coopnet::validate(model);
  validate(config);
  check_q_tr(q_tr);
  if (cluster_size < 1) {
    throw std::domain_error(
        "simulate_cluster_access: cluster_size must be >= 1");
  }
  const double field_intensity =
      config.cluster_source == ClusterSource::thinned_process
          ? (1.0 - q_tr) * model.tx_intensity
          : model.tx_intensity;
  const std::uint64_t chunk_count = (config.trials + kChunk - 1) / kChunk;
  std::vector<std::uint64_t> storage(chunk_count, 0);
  run_chunks(config.trials, [&](std::uint64_t c, std::uint64_t lo,
                                std::uint64_t hi) {
    std::vector<TxPoint> field;
    for (std::uint64_t t = lo; t < hi; ++t) {
      TrialRng rng(config.master_seed, kStreamAccess, t);
      double field_radius = 0.0;
      double edge2 = 0.0;
      std::uint64_t candidates = 0;
      if (!competition_trial(rng, cluster_size, field_intensity,
                             model.rx_intensity, config.window_radius, field,
                             &field_radius, &edge2, &candidates)) {
        continue;
      }
      if (rng.u01() * static_cast<double>(candidates) < 1.0) {
        ++storage[c];
      }
    }
  });
  std::uint64_t selected = 0;
  for (std::uint64_t c : storage) {
    selected += c;
  }
  ProbabilityEstimate est;
  est.trials = config.trials;
  est.seed = config.master_seed;
  est.freq = static_cast<double>(selected) / static_cast<double>(config.trials);
  const auto [lo, hi] = wilson99(selected, config.trials);
  est.ci_low = lo;
  est.ci_high = hi;
  return est;
}

EmpiricalEstimate simulate_overall_success(const NetworkModel& model,
                                           const std::vector<double>& omega,
                                           double q_tr,
                                           const SimConfig& config) {
  coopnet::validate(model);
  validate(config);
  check_omega(omega);
  check_q_tr(q_tr);
  const int k = static_cast<int>(omega.size());
  const double p_tr = 1.0 - q_tr;
  const bool thinned =
      config.cluster_source == ClusterSource::thinned_process;
  const double field_intensity =
      thinned ? p_tr * model.tx_intensity : model.tx_intensity;
  const double fill_intensity = p_tr * model.tx_intensity;
  const std::size_t width = config.theta_grid.size();
  const std::uint64_t chunk_count = (config.trials + kChunk - 1) / kChunk;
  std::vector<std::uint64_t> storage(chunk_count * width, 0);
  run_chunks(config.trials, [&](std::uint64_t c, std::uint64_t lo,
                                std::uint64_t hi) {
    std::vector<TxPoint> field;
    std::uint64_t* mine = storage.data() + c * width;
    for (std::uint64_t t = lo; t < hi; ++t) {
      TrialRng rng(config.master_seed, kStreamOverall, t);
      double field_radius = 0.0;
      double edge2 = 0.0;
      std::uint64_t candidates = 0;
      if (!competition_trial(rng, k, field_intensity, model.rx_intensity,
                             config.window_radius, field, &field_radius,
                             &edge2, &candidates)) {
        continue;
      }
      if (!(rng.u01() * static_cast<double>(candidates) < 1.0)) {
        continue;  // another user got the cluster this slot
      }
      const double edge = std::sqrt(edge2);
      double signal = 0.0;
      for (int i = 0; i < k; ++i) {
        const bool active = rng.bernoulli(p_tr);
        const double fade = rng.exponential();
        if (active) {
          signal +=
              fade * std::pow(omega[static_cast<std::size_t>(i)] * edge,
                              -model.eta);
        }
      }
      // Out-of-cluster co-tier interference: the realized field beyond the
      // cluster edge (thinned here if the field is the full process), then a
      // fresh annulus out to the truncation radius.
      double interference = 0.0;
      for (std::size_t j = static_cast<std::size_t>(k); j < field.size();
           ++j) {
        const bool transmitting = thinned || rng.bernoulli(p_tr);
        const double fade = rng.exponential();
        if (transmitting) {
          interference += fade * std::pow(field[j].r2, -0.5 * model.eta);
        }
      }
      const double outer =
          outer_radius(edge, model.eta, config.window_radius);
      interference += annulus_interference(rng, fill_intensity, 1.0,
                                           field_radius, outer, model.eta);
      for (const TierConfig& tier : model.tiers) {
        interference += annulus_interference(rng, tier.tx_prob * tier.intensity,
                                             tier.power, 0.0, outer,
                                             model.eta);
      }
      record_successes(signal, interference + model.noise, config.theta_grid,
                       mine);
    }
  });
  std::vector<std::uint64_t> totals(width, 0);
  for (std::uint64_t c = 0; c < chunk_count; ++c) {
    for (std::size_t j = 0; j < width; ++j) {
      totals[j] += storage[c * width + j];
    }
  }
  return assemble(config, totals);
}

MeanEstimate empirical_laplace(double intensity_eff, double power,
                               double guard_radius, double eta, double s,
                               const SimConfig& config) {
  validate(config);
  if (!(eta > 2.0)) {
    throw std::domain_error("empirical_laplace: eta must exceed 2");
  }
  if (!(intensity_eff >= 0.0) || !(power > 0.0) || !(guard_radius >= 0.0) ||
      !(s >= 0.0)) {
    throw std::domain_error("empirical_laplace: bad field parameters");
  }
  MeanEstimate est;
  est.trials = config.trials;
  est.seed = config.master_seed;
  if (s == 0.0 || intensity_eff == 0.0) {
    est.mean = 1.0;
    est.std_error = 0.0;
    return est;
  }
  // With no guard the window rule needs an absolute anchor: truncate where
  // the expected tail 2 pi lambda s P R^{2-eta}/(eta-2) drops below 1e-4.
  const double tail_radius =
      std::pow(2.0 * M_PI * intensity_eff * s * power / ((eta - 2.0) * 1e-4),
               1.0 / (eta - 2.0));
  const double outer = std::max(
      outer_radius(guard_radius, eta, config.window_radius), tail_radius);
  const std::uint64_t chunk_count = (config.trials + kChunk - 1) / kChunk;
  std::vector<double> sums(chunk_count, 0.0);
  std::vector<double> squares(chunk_count, 0.0);
  run_chunks(config.trials, [&](std::uint64_t c, std::uint64_t lo,
                                std::uint64_t hi) {
    for (std::uint64_t t = lo; t < hi; ++t) {
      TrialRng rng(config.master_seed, kStreamLaplace, t);
      const double shot = annulus_interference(rng, intensity_eff, power,
                                               guard_radius, outer, eta);
      const double value = std::exp(-s * shot);
      sums[c] += value;
      squares[c] += value * value;
    }
  });
  double total = 0.0;
  double total_sq = 0.0;
  for (std::uint64_t c = 0; c < chunk_count; ++c) {
    total += sums[c];
    total_sq += squares[c];
  }
  const double n = static_cast<double>(config.trials);
  est.mean = total / n;
  if (config.trials > 1) {
    const double var =
        std::max(0.0, (total_sq - total * total / n) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

std::vector<double> sample_kth_neighbor_distances(double intensity, int k,
                                                  std::uint64_t count,
                                                  std::uint64_t seed) {
  if (!(intensity > 0.0)) {
    throw std::domain_error(
        "sample_kth_neighbor_distances: intensity must be positive");
  }
  if (k < 1 || count < 1) {
    throw std::domain_error(
        "sample_kth_neighbor_distances: need k >= 1 and count >= 1");
  }
  std::vector<double> distances(count);
  run_chunks(count, [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
    std::vector<double> r2s;
    for (std::uint64_t t = lo; t < hi; ++t) {
      TrialRng rng(seed, kStreamNeighbor, t);
      double radius =
          std::sqrt((k + 10.0 * std::sqrt(static_cast<double>(k)) + 30.0) /
                    (intensity * M_PI));
      while (true) {
        const std::uint64_t points =
            rng.poisson(intensity * M_PI * radius * radius);
        if (points >= static_cast<std::uint64_t>(k)) {
          r2s.clear();
          r2s.reserve(points);
          for (std::uint64_t i = 0; i < points; ++i) {
            r2s.push_back(rng.u01() * radius * radius);
          }
          std::nth_element(r2s.begin(), r2s.begin() + (k - 1), r2s.end());
          distances[t] = std::sqrt(r2s[static_cast<std::size_t>(k) - 1]);
          break;
        }
        radius *= 2.0;  // deep-tail miss; practically unreachable
      }
    }
  });
  return distances;
}

}  // namespace coopnet::mcsim
