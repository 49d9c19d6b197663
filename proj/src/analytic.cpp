#include "coopnet/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "coopnet/specfun.hpp"

namespace coopnet {

void validate(const NetworkModel& model) {
  if (!(model.tx_intensity > 0.0)) {
    throw std::domain_error("NetworkModel: tx_intensity must be positive");
  }
  if (!(model.rx_intensity > 0.0)) {
    throw std::domain_error("NetworkModel: rx_intensity must be positive");
  }
  if (!(model.eta > 2.0)) {
    throw std::domain_error(
        "NetworkModel: eta must exceed 2 (pathloss constraint)");
  }
  if (!(model.noise >= 0.0)) {
    throw std::domain_error("NetworkModel: noise must be nonnegative");
  }
  if (!(model.out_cluster_tx_prob >= 0.0 &&
        model.out_cluster_tx_prob <= 1.0)) {
    throw std::domain_error(
        "NetworkModel: out_cluster_tx_prob must lie in [0, 1]");
  }
  for (const TierConfig& tier : model.tiers) {
    if (!(tier.intensity >= 0.0)) {
      throw std::domain_error("NetworkModel: tier intensity must be >= 0");
    }
    if (!(tier.tx_prob > 0.0 && tier.tx_prob <= 1.0)) {
      throw std::domain_error("NetworkModel: tier tx_prob must lie in (0, 1]");
    }
    if (!(tier.power > 0.0)) {
      throw std::domain_error("NetworkModel: tier power must be positive");
    }
  }
}

}  // namespace coopnet

namespace coopnet::analytic {

namespace {

// Near-ties are merged before any partial-fraction work; gaps below this
// level would blow up the (v_l - v_j)^{-1} factors past double precision.
constexpr double kGroupSnapTol = 1e-6;
constexpr int kMaxClusterSize = 12;

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

double binomial(int n, int k) {
  if (k < 0 || k > n) {
    return 0.0;
  }
  k = std::min(k, n - k);
  double result = 1.0;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<double>(n - k + i) / i;
  }
  return result;
}

// Gamma(1+2/eta) Gamma(1-2/eta): the fractional-moment constant of the
// unshielded interference field.
double gamma_pair(double eta) {
  return specfun::gamma_fn(1.0 + 2.0 / eta) *
         specfun::gamma_fn(1.0 - 2.0 / eta);
}

void check_cluster_size(std::size_t k) {
  if (k == 0) {
    throw std::domain_error("cluster must contain at least one transmitter");
  }
  if (k > static_cast<std::size_t>(kMaxClusterSize)) {
    throw std::domain_error(
        "cluster sizes above 12 are not supported (composition enumeration "
        "grows factorially)");
  }
}

double composition_sum(int m, const geometry::MultiplicityGroups& groups,
                       int u, std::size_t idx, int remaining, double running) {
  if (idx == groups.values.size()) {
    return remaining == 0 ? running : 0.0;
  }
  double total = 0.0;
  if (static_cast<int>(idx) == u) {
    const int top = std::min(remaining, m);
    for (int k = 0; k <= top; ++k) {
      const double factor =
          binomial(m, k) * std::pow(groups.values[idx], m - k);
      total += composition_sum(m, groups, u, idx + 1, remaining - k,
                               running * factor);
    }
  } else {
    const double gap = groups.values[idx] - groups.values[u];
    for (int k = 0; k <= remaining; ++k) {
      const double factor = binomial(groups.counts[idx] + k - 1, k) *
                            std::pow(gap, -(groups.counts[idx] + k));
      total += composition_sum(m, groups, u, idx + 1, remaining - k,
                               running * factor);
    }
  }
  return total;
}

// Mixture weights W[u][v-1] = sum_m (alpha_m(scaled) - alpha_m(base)) *
// A_m(n_u, v); shared by the signal-sum CCDF and the conditioned link curve.
struct MixtureTable {
  geometry::MultiplicityGroups groups;
  std::vector<std::vector<double>> weight;
  double idle_product = 1.0;
};

MixtureTable build_mixture_table(const std::vector<double>& weights,
                                 const geometry::InClusterAvailability& avail) {
  check_cluster_size(weights.size());
  const int k = static_cast<int>(weights.size());
  const std::vector<double> scaled =
      geometry::idle_scaled_pathloss(weights, avail);
  const std::vector<double> base_alpha = geometry::alpha_coefficients(weights);
  const std::vector<double> scaled_alpha =
      geometry::alpha_coefficients(scaled);
  MixtureTable table;
  table.idle_product = geometry::availability_product(avail);
  table.groups = geometry::group_multiplicities(weights, kGroupSnapTol);
  table.weight.resize(table.groups.values.size());
  for (std::size_t u = 0; u < table.groups.values.size(); ++u) {
    table.weight[u].resize(static_cast<std::size_t>(table.groups.counts[u]));
    for (int v = 1; v <= table.groups.counts[u]; ++v) {
      double w = 0.0;
      for (int m = 0; m < k; ++m) {
        w += (scaled_alpha[m] - base_alpha[m]) *
             partial_fraction_coeff(m, table.groups, static_cast<int>(u), v);
      }
      table.weight[u][static_cast<std::size_t>(v) - 1] = w;
    }
  }
  return table;
}

// Success factor of one exponential tail piece at effective threshold t:
// receiver noise, the shielded co-tier field beyond the cluster edge, and the
// unshielded interfering tiers.
double attenuation_factor(const NetworkModel& model, double edge_distance,
                          double decay, double t) {
  const double eta = model.eta;
  const double edge_sq = edge_distance * edge_distance;
  double log_factor = -t * std::pow(edge_distance, eta) * decay * model.noise;
  if (model.out_cluster_tx_prob > 0.0) {
    log_factor -= M_PI * model.out_cluster_tx_prob * model.tx_intensity *
                  edge_sq * specfun::pathloss_functional(decay * t, eta);
  }
  if (!model.tiers.empty()) {
    const double gg = gamma_pair(eta);
    const double decay_sq = std::pow(decay, 2.0 / eta);
    for (const TierConfig& tier : model.tiers) {
      log_factor -= M_PI * tier.tx_prob * tier.intensity * decay_sq * edge_sq *
                    std::pow(t * tier.power, 2.0 / eta) * gg;
    }
  }
  return std::exp(log_factor);
}

// Ascending decay values with exact ties spread by 1e-6 so the distinct-form
// partial fractions stay finite.
std::vector<double> distinct_or_perturbed(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const geometry::MultiplicityGroups groups =
      geometry::group_multiplicities(values, 1e-9);
  if (groups.values.size() == values.size()) {
    return values;
  }
  std::cerr << "warning: repeated normalized distances perturbed by 1e-6 "
               "relative for the distance-averaged form\n";
  std::vector<double> spread;
  spread.reserve(values.size());
  for (std::size_t g = 0; g < groups.values.size(); ++g) {
    for (int j = 0; j < groups.counts[g]; ++j) {
      spread.push_back(groups.values[g] * (1.0 - 1e-6 * j));
    }
  }
  std::sort(spread.begin(), spread.end());
  return spread;
}

std::vector<double> decay_values_from_omega(const std::vector<double>& omega,
                                            double eta) {
  check_cluster_size(omega.size());
  double prev = 0.0;
  for (double w : omega) {
    if (!(w > 0.0)) {
      throw std::domain_error("omega entries must be positive");
    }
    if (w < prev) {
      throw std::domain_error("omega entries must be ascending");
    }
    prev = w;
  }
  if (std::fabs(omega.back() - 1.0) > 1e-12) {
    throw std::domain_error("omega must be normalized: last entry 1");
  }
  std::vector<double> values(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) {
    values[i] = std::pow(omega[i], eta);
  }
  values.back() = 1.0;
  return values;
}

// Shared core of the distance-averaged forms: partial fractions over distinct
// decay values with a per-pole averaged tail (1 + F + tier load + shift)^-K.
double averaged_tail_sum(const NetworkModel& model, std::vector<double> values,
                         double q_tr, double theta, double shift) {
  if (!(q_tr >= 0.0 && q_tr < 1.0)) {
    throw std::domain_error("q_tr must lie in [0, 1)");
  }
  if (!(theta >= 0.0)) {
    throw std::domain_error("theta must be nonnegative");
  }
  values = distinct_or_perturbed(std::move(values));
  const int k = static_cast<int>(values.size());
  const double eta = model.eta;
  const std::vector<double> alpha = geometry::alpha_coefficients(values);
  const double p_tr = 1.0 - q_tr;
  double tier_load = 0.0;
  for (const TierConfig& tier : model.tiers) {
    tier_load += (tier.tx_prob / p_tr) * (tier.intensity / model.tx_intensity) *
                 std::pow(tier.power, 2.0 / eta);
  }
  const double gg = model.tiers.empty() ? 0.0 : gamma_pair(eta);
  const double q_k = std::pow(q_tr, k);
  const double theta_frac = std::pow(theta, 2.0 / eta);
  double total = 0.0;
  for (int j = 0; j < k; ++j) {
    const double vj = values[static_cast<std::size_t>(j)];
    double numerator = 0.0;
    double vj_power = 1.0;
    for (int i = 0; i < k; ++i) {
      numerator +=
          alpha[static_cast<std::size_t>(i)] * (std::pow(q_tr, i) - q_k) *
          vj_power;
      vj_power *= vj;
    }
    double denominator = vj;
    for (int l = 0; l < k; ++l) {
      if (l != j) {
        denominator *= values[static_cast<std::size_t>(l)] - vj;
      }
    }
    const double tier_term =
        tier_load == 0.0
            ? 0.0
            : std::pow(vj, 2.0 / eta) * theta_frac * gg * tier_load;
    const double tail = std::pow(
        1.0 + specfun::pathloss_functional(vj * theta, eta) + tier_term + shift,
        -k);
    total += numerator / denominator * tail;
  }
  return total;
}

// C1(K)/(beta + C2(K)) — the drop-off the access competition adds inside the
// averaged tail.
double access_shift(int cluster_size, double beta) {
  if (cluster_size < 1) {
    throw std::domain_error("cluster size must be >= 1");
  }
  if (!(beta > 0.0)) {
    throw std::domain_error("beta must be positive");
  }
  if (cluster_size == 1) {
    return 0.725 / beta;
  }
  const double c1 = 0.06 * cluster_size + 0.78;
  const double c2 = 0.34 * cluster_size - 0.49;
  return c1 / (beta + c2);
}

}  // namespace

double partial_fraction_coeff(int m, const geometry::MultiplicityGroups& groups,
                              int u, int v) {
  if (u < 0 || static_cast<std::size_t>(u) >= groups.values.size()) {
    throw std::domain_error("partial_fraction_coeff: group index out of range");
  }
  if (m < 0) {
    throw std::domain_error("partial_fraction_coeff: m must be nonnegative");
  }
  if (v < 1 || v > groups.counts[static_cast<std::size_t>(u)]) {
    throw std::domain_error(
        "partial_fraction_coeff: v must lie in 1..multiplicity");
  }
  const int remaining = groups.counts[static_cast<std::size_t>(u)] - v;
  const double sign = (remaining % 2 == 0) ? 1.0 : -1.0;
  const double lead =
      std::pow(groups.values[static_cast<std::size_t>(u)], -v);
  return sign * lead * composition_sum(m, groups, u, 0, remaining, 1.0);
}

double sk_ccdf(const geometry::ClusterGeometry& geometry,
               const geometry::InClusterAvailability& avail, double x) {
  if (!(x >= 0.0)) {
    throw std::domain_error("sk_ccdf: x must be nonnegative");
  }
  const std::vector<double> weights = geometry::normalized_pathloss(geometry);
  const MixtureTable table = build_mixture_table(weights, avail);
  double total = 0.0;
  for (std::size_t u = 0; u < table.groups.values.size(); ++u) {
    for (int v = 1; v <= table.groups.counts[u]; ++v) {
      total += table.weight[u][static_cast<std::size_t>(v) - 1] *
               specfun::reg_upper_inc_gamma(v, table.groups.values[u] * x);
    }
  }
  return clamp01(table.idle_product * total);
}

double link_ccdf_theorem1(const NetworkModel& model,
                          const geometry::ClusterGeometry& geometry,
                          double theta, bool* clamped) {
  validate(model);
  if (!(theta >= 0.0)) {
    throw std::domain_error("link_ccdf_theorem1: theta must be nonnegative");
  }
  const std::vector<double> weights = geometry::normalized_pathloss(geometry);
  const MixtureTable table = build_mixture_table(weights, model.in_cluster);
  const double edge_distance = geometry.distances.back();
  double total = 0.0;
  for (std::size_t u = 0; u < table.groups.values.size(); ++u) {
    const double decay = table.groups.values[u];
    for (int v = 1; v <= table.groups.counts[u]; ++v) {
      // Sharp exponential bound on the order-v Gamma tail: kappa = (v!)^{-1/v}.
      const double kappa = std::exp(-std::lgamma(v + 1.0) / v);
      double tail = 0.0;
      for (int l = 1; l <= v; ++l) {
        const double sign = (l % 2 == 1) ? 1.0 : -1.0;
        tail += binomial(v, l) * sign *
                attenuation_factor(model, edge_distance, decay,
                                   theta * kappa * l);
      }
      total += table.weight[u][static_cast<std::size_t>(v) - 1] * tail;
    }
  }
  const double raw = table.idle_product * total;
  if (clamped != nullptr) {
    *clamped = raw < 0.0 || raw > 1.0;
  }
  return clamp01(raw);
}

double link_ccdf_prop1(const NetworkModel& model,
                       const geometry::ClusterGeometry& geometry,
                       double theta) {
  validate(model);
  if (!(theta >= 0.0)) {
    throw std::domain_error("link_ccdf_prop1: theta must be nonnegative");
  }
  const std::vector<double> values = geometry::normalized_pathloss(geometry);
  check_cluster_size(values.size());
  const geometry::MultiplicityGroups groups =
      geometry::group_multiplicities(values, kGroupSnapTol);
  if (groups.values.size() != values.size()) {
    throw std::domain_error(
        "link_ccdf_prop1: repeated or near-repeated distances; route through "
        "link_ccdf_theorem1");
  }
  const int k = static_cast<int>(values.size());
  const std::vector<double> scaled =
      geometry::idle_scaled_pathloss(values, model.in_cluster);
  const std::vector<double> base_alpha = geometry::alpha_coefficients(values);
  const std::vector<double> scaled_alpha =
      geometry::alpha_coefficients(scaled);
  const double idle_product =
      geometry::availability_product(model.in_cluster);
  const double edge_distance = geometry.distances.back();
  double total = 0.0;
  for (int j = 0; j < k; ++j) {
    const double vj = values[static_cast<std::size_t>(j)];
    double numerator = 0.0;
    double vj_power = 1.0;
    for (int i = 0; i < k; ++i) {
      numerator += (scaled_alpha[static_cast<std::size_t>(i)] -
                    base_alpha[static_cast<std::size_t>(i)]) *
                   vj_power;
      vj_power *= vj;
    }
    double denominator = vj;
    for (int l = 0; l < k; ++l) {
      if (l != j) {
        denominator *= values[static_cast<std::size_t>(l)] - vj;
      }
    }
    total += numerator / denominator *
             attenuation_factor(model, edge_distance, vj, theta);
  }
  return clamp01(idle_product * total);
}

double link_ccdf_theorem2(const NetworkModel& model,
                          const std::vector<double>& omega, double q_tr,
                          double theta) {
  validate(model);
  const std::vector<double> values =
      decay_values_from_omega(omega, model.eta);
  return clamp01(averaged_tail_sum(model, values, q_tr, theta, 0.0));
}

double cluster_access_series(double beta, int max_terms) {
  if (!(beta > 0.0)) {
    throw std::domain_error("cluster_access_series: beta must be positive");
  }
  if (max_terms < 1) {
    throw std::domain_error("cluster_access_series: max_terms must be >= 1");
  }
  const double inv_beta = 1.0 / beta;
  const double base = 3.5 + inv_beta;
  double term = std::pow(3.5, 3.5) * 3.5 * std::pow(base, -4.5);
  double sum = term;
  for (int i = 2; i <= max_terms; ++i) {
    term *= (i + 2.5) * inv_beta / (i * base);
    sum += term;
    if (term < 1e-12) {
      break;
    }
  }
  return sum;
}

double cluster_access_approx(int cluster_size, double beta) {
  return std::pow(1.0 + access_shift(cluster_size, beta),
                  -static_cast<double>(cluster_size));
}

double overall_success_theorem3(const NetworkModel& model,
                                const std::vector<double>& omega, double q_tr,
                                double theta) {
  validate(model);
  const std::vector<double> values =
      decay_values_from_omega(omega, model.eta);
  const double beta =
      (1.0 - q_tr) * model.tx_intensity / model.rx_intensity;
  const double shift = access_shift(static_cast<int>(omega.size()), beta);
  return clamp01(averaged_tail_sum(model, values, q_tr, theta, shift));
}

double asymptotic_outage(const geometry::InClusterAvailability& avail) {
  return geometry::availability_product(avail);
}

double outage_floor_infinite_buffer(const NetworkModel& model,
                                    const std::vector<double>& omega,
                                    double rho, double p_ch, double theta) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw std::domain_error(
        "outage_floor_infinite_buffer: rho must lie in (0, 1)");
  }
  if (!(p_ch > 0.0 && p_ch <= 1.0)) {
    throw std::domain_error(
        "outage_floor_infinite_buffer: p_ch must lie in (0, 1]");
  }
  if (rho >= p_ch) {
    throw std::domain_error(
        "outage_floor_infinite_buffer: requires rho < p_ch (an "
        "arrival-saturated buffer pins the transmit probability at p_ch; "
        "evaluate link_ccdf_theorem2 with q_tr = 1 - p_ch instead)");
  }
  return clamp01(1.0 - link_ccdf_theorem2(model, omega, 1.0 - rho, theta));
}

double interference_laplace(double s, double intensity_eff, double power,
                            double guard_radius, double eta) {
  if (!(eta > 2.0)) {
    throw std::domain_error("interference_laplace: eta must exceed 2");
  }
  if (!(s >= 0.0)) {
    throw std::domain_error("interference_laplace: s must be nonnegative");
  }
  if (!(intensity_eff >= 0.0)) {
    throw std::domain_error(
        "interference_laplace: intensity must be nonnegative");
  }
  if (!(power > 0.0)) {
    throw std::domain_error("interference_laplace: power must be positive");
  }
  if (!(guard_radius >= 0.0)) {
    throw std::domain_error(
        "interference_laplace: guard radius must be nonnegative");
  }
  if (s == 0.0 || intensity_eff == 0.0) {
    return 1.0;
  }
  if (guard_radius > 0.0) {
    const double scaled = s * power / std::pow(guard_radius, eta);
    return std::exp(-M_PI * intensity_eff * guard_radius * guard_radius *
                    specfun::pathloss_functional(scaled, eta));
  }
  return std::exp(-M_PI * intensity_eff * gamma_pair(eta) *
                  std::pow(power * s, 2.0 / eta));
}

double kth_neighbor_pdf(double r, double intensity_eff, int k) {
  if (!(r > 0.0)) {
    throw std::domain_error("kth_neighbor_pdf: r must be positive");
  }
  if (!(intensity_eff > 0.0)) {
    throw std::domain_error("kth_neighbor_pdf: intensity must be positive");
  }
  if (k < 1) {
    throw std::domain_error("kth_neighbor_pdf: k must be >= 1");
  }
  const double mean_count = intensity_eff * M_PI * r * r;
  return 2.0 / r *
         std::exp(k * std::log(mean_count) - mean_count - std::lgamma(k));
}

double kth_neighbor_cdf(double r, double intensity_eff, int k) {
  if (!(intensity_eff > 0.0)) {
    throw std::domain_error("kth_neighbor_cdf: intensity must be positive");
  }
  if (k < 1) {
    throw std::domain_error("kth_neighbor_cdf: k must be >= 1");
  }
  if (r <= 0.0) {
    return 0.0;
  }
  const double mean_count = intensity_eff * M_PI * r * r;
  return 1.0 - specfun::reg_upper_inc_gamma(k, mean_count);
}

}  // namespace coopnet::analytic
