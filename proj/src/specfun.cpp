#include "coopnet/specfun.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace coopnet::specfun {

namespace {

// Adaptive Simpson on a smooth integrand. Used only by the near-w=1 branch
// of gauss_2f1, where the integrand is monotone and bounded by 1.
template <typename F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm,
                       double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// 2F1(1, b; b+1; z) = int_0^1 du / (1 - z u^{1/b}), exact for z <= 0, b > 0.
double hyp2f1_family_integral(double b, double z) {
  const double inv_b = 1.0 / b;
  const auto f = [z, inv_b](double u) {
    return 1.0 / (1.0 - z * std::pow(u, inv_b));
  };
  const double fa = f(0.0);
  const double fb = f(1.0);
  const double fm = f(0.5);
  const double whole = (fa + 4.0 * fm + fb) / 6.0;
  return simpson_recurse(f, 0.0, 1.0, fa, fm, fb, whole, 1e-13, 60);
}

double hyp2f1_series(double b, double c, double arg) {
  // sum_k ((b)_k / (c)_k) arg^k, |arg| < 1. Terms are positive for arg > 0
  // and alternating for arg < 0; either way |term| is geometrically bounded.
  double term = 1.0;
  double sum = 1.0;
  for (long k = 0; k < 4000000; ++k) {
    term *= (b + static_cast<double>(k)) / (c + static_cast<double>(k)) * arg;
    sum += term;
    if (std::fabs(term) < 1e-16 * std::fabs(sum)) {
      return sum;
    }
  }
  throw std::runtime_error("gauss_2f1: series did not converge");
}

}  // namespace

double gamma_fn(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("gamma_fn: requires x > 0");
  }
  return std::tgamma(x);
}

double reg_upper_inc_gamma(int n, double x) {
  if (n < 1) {
    throw std::domain_error("reg_upper_inc_gamma: requires integer order n >= 1");
  }
  if (!(x >= 0.0)) {
    throw std::domain_error("reg_upper_inc_gamma: requires x >= 0");
  }
  if (x > 745.0) {
    return 0.0;  // e^{-x} underflows; the true value is far below double range
  }
  double term = 1.0;
  double sum = 1.0;
  for (int i = 1; i < n; ++i) {
    term *= x / static_cast<double>(i);
    sum += term;
  }
  return std::exp(-x) * sum;
}

double alzer_bound(int n, double x) {
  if (n < 1) {
    throw std::domain_error("alzer_bound: requires integer order n >= 1");
  }
  if (!(x >= 0.0)) {
    throw std::domain_error("alzer_bound: requires x >= 0");
  }
  const double c = std::exp(-std::lgamma(static_cast<double>(n) + 1.0) /
                            static_cast<double>(n));
  // 1 - (1 - e^{-cx})^n, written to stay accurate when e^{-cx} is tiny.
  return -std::expm1(static_cast<double>(n) * std::log1p(-std::exp(-c * x)));
}

double gauss_2f1(double b, double c, double z) {
  if (!(c > b && b > 0.0)) {
    throw std::domain_error("gauss_2f1: requires c > b > 0");
  }
  if (!(z <= 0.0)) {
    throw std::domain_error("gauss_2f1: requires z <= 0");
  }
  if (z == 0.0) {
    return 1.0;
  }
  if (z >= -0.5) {
    return hyp2f1_series(b, c, z);
  }
  // Pfaff: 2F1(1, b; c; z) = (1-z)^{-1} 2F1(1, c-b; c; z/(z-1)).
  const double w = z / (z - 1.0);
  if (w > 0.99995 && std::fabs(c - (b + 1.0)) < 1e-9) {
    return hyp2f1_family_integral(b, z);
  }
  return hyp2f1_series(c - b, c, w) / (1.0 - z);
}

double pathloss_functional(double t1, double t2) {
  if (!(t2 > 2.0)) {
    throw std::domain_error("pathloss_functional: requires t2 > 2");
  }
  if (!(t1 >= 0.0)) {
    throw std::domain_error("pathloss_functional: requires t1 >= 0");
  }
  if (t1 == 0.0) {
    return 0.0;
  }
  if (t1 >= 1e7) {
    // Large-argument expansion of 2 int_1^inf x/(1 + x^{t2}/t1) dx: extend the
    // integral to 0 (a Beta integral worth Gamma(1+2/t2)Gamma(1-2/t2) t1^{2/t2}),
    // subtract the [0,1] part 1 - 2/((t2+2) t1) + O(t1^{-2}).
    const double gg = std::tgamma(1.0 + 2.0 / t2) * std::tgamma(1.0 - 2.0 / t2);
    return gg * std::pow(t1, 2.0 / t2) - 1.0 + 2.0 / ((t2 + 2.0) * t1);
  }
  return 2.0 * t1 / (t2 - 2.0) * gauss_2f1(1.0 - 2.0 / t2, 2.0 - 2.0 / t2, -t1);
}

}  // namespace coopnet::specfun
