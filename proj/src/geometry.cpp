#include "coopnet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coopnet::geometry {

void validate(const ClusterGeometry& geometry) {
  if (geometry.distances.empty()) {
    throw std::domain_error("ClusterGeometry: needs at least one distance");
  }
  double prev = 0.0;
  for (double d : geometry.distances) {
    if (!(d > 0.0)) {
      throw std::domain_error("ClusterGeometry: distances must be positive");
    }
    if (d < prev) {
      throw std::domain_error("ClusterGeometry: distances must be ascending");
    }
    prev = d;
  }
  if (!(geometry.eta > 2.0)) {
    throw std::domain_error("ClusterGeometry: eta must exceed 2");
  }
}

std::vector<double> normalized_pathloss(const ClusterGeometry& geometry) {
  validate(geometry);
  const double ref = geometry.distances.back();
  std::vector<double> weights(geometry.distances.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] = std::pow(geometry.distances[i] / ref, geometry.eta);
  }
  weights.back() = 1.0;
  return weights;
}

void validate(const InClusterAvailability& avail, int expected_size) {
  if (avail.q_list.empty()) {
    throw std::domain_error("InClusterAvailability: q_list must be non-empty");
  }
  if (expected_size > 0 &&
      avail.q_list.size() != static_cast<std::size_t>(expected_size)) {
    throw std::domain_error(
        "InClusterAvailability: q_list size must match the cluster size");
  }
  for (double q : avail.q_list) {
    if (!(q >= 0.0) || !(q < 1.0)) {
      throw std::domain_error(
          "InClusterAvailability: every q must lie in [0, 1)");
    }
  }
}

double availability_product(const InClusterAvailability& avail) {
  validate(avail);
  double product = 1.0;
  for (double q : avail.q_list) {
    product *= q;
  }
  return product;
}

std::vector<double> idle_scaled_pathloss(const std::vector<double>& weights,
                                         const InClusterAvailability& avail) {
  validate(avail, static_cast<int>(weights.size()));
  std::vector<double> scaled(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (avail.q_list[i] == 0.0) {
      throw std::domain_error(
          "idle_scaled_pathloss: q == 0 has no scaled weight; use the "
          "always-active limit form");
    }
    scaled[i] = weights[i] / avail.q_list[i];
  }
  return scaled;
}

MultiplicityGroups group_multiplicities(const std::vector<double>& values,
                                        double rel_tol) {
  if (values.empty()) {
    throw std::domain_error("group_multiplicities: empty input");
  }
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  MultiplicityGroups groups;
  double sum = sorted.front();
  int count = 1;
  auto flush = [&] {
    groups.values.push_back(sum / count);
    groups.counts.push_back(count);
  };
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const double representative = sum / count;
    if (sorted[i] - representative <=
        rel_tol * std::max(std::fabs(sorted[i]), std::fabs(representative))) {
      sum += sorted[i];
      ++count;
    } else {
      flush();
      sum = sorted[i];
      count = 1;
    }
  }
  flush();
  return groups;
}

MultiplicityGroups group_multiplicities(const ClusterGeometry& geometry,
                                        double rel_tol) {
  return group_multiplicities(normalized_pathloss(geometry), rel_tol);
}

std::vector<double> alpha_coefficients(const std::vector<double>& values) {
  const std::size_t k = values.size();
  if (k == 0) {
    throw std::domain_error("alpha_coefficients: empty input");
  }
  // esym[j] accumulates the elementary symmetric polynomial e_j; the
  // descending inner loop makes each update use only previous-round values.
  std::vector<double> esym(k + 1, 0.0);
  esym[0] = 1.0;
  for (double v : values) {
    for (std::size_t j = std::min(esym.size() - 1, k); j >= 1; --j) {
      esym[j] += v * esym[j - 1];
    }
  }
  std::vector<double> alpha(k);
  for (std::size_t i = 0; i < k; ++i) {
    alpha[i] = ((i % 2) ? -1.0 : 1.0) * esym[k - i];
  }
  return alpha;
}

}  // namespace coopnet::geometry
