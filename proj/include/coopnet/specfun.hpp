#pragma once

// Deterministic, allocation-free scalar kernels shared by the analytic model
// and its validation oracles. Only the restricted families actually used by
// the network model are supported; see each function's contract.

namespace coopnet::specfun {

// Gamma function on the positive real axis. Throws std::domain_error for x <= 0.
double gamma_fn(double x);

// Regularized upper incomplete gamma Q(n, x) for integer order n >= 1 and
// x >= 0, evaluated through the exact finite Poisson series
// e^{-x} sum_{i<n} x^i / i!. The order is a buffer or multiplicity count,
// always a small integer, so the series is both exact and cheap.
double reg_upper_inc_gamma(int n, double x);

// Alzer's upper bound on Q(n, x): 1 - (1 - e^{-c x})^n with c = (n!)^{-1/n}.
// Dominates reg_upper_inc_gamma everywhere; coincides with it at n = 1 and x = 0.
double alzer_bound(int n, double x);

// Gauss hypergeometric 2F1(1, b; c; z) restricted to c > b > 0 and z <= 0.
// Direct series on [-0.5, 0]; Pfaff transformation w = z/(z-1) below that
// (positive terms, no cancellation); for the c = b + 1 subfamily with w very
// close to 1 the exact integral form int_0^1 du / (1 - z u^{1/b}) is used.
double gauss_2f1(double b, double c, double z);

// Interference functional
//   F(t1, t2) = (2 t1 / (t2 - 2)) * 2F1(1, 1 - 2/t2; 2 - 2/t2; -t1)
//             = 2 int_1^inf x / (1 + x^{t2} / t1) dx,
// nonnegative and strictly increasing in t1. Requires t1 >= 0 and t2 > 2
// (the integral diverges at t2 <= 2).
double pathloss_functional(double t1, double t2);

}  // namespace coopnet::specfun
