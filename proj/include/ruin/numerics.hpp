#pragma once

#include <functional>

namespace ruin {

struct ToleranceConfig {
  double root_abs_tol = 1e-12;
  double quad_abs_tol = 1e-10;
  int max_iterations = 200;
  // Relative target for integrate(); 0 means the absolute target alone decides.
  double quad_rel_tol = 0.0;

  void validate() const;
};

struct Interval {
  double lo;
  double hi;
};

using ScalarFunction = std::function<double(double)>;

/// Bracketed root of a continuous function that changes sign on `bracket`.
/// Bisection; the returned point always lies inside the bracket.
double root_solve(const ScalarFunction& f, Interval bracket, const ToleranceConfig& tol = {});

struct QuadratureResult {
  double value = 0.0;
  double err_est = 0.0;
};

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature on [a, b].
/// `max_iterations` bounds the number of panel bisections.
QuadratureResult integrate(const ScalarFunction& f, double a, double b, const ToleranceConfig& tol = {});

double normal_cdf(double z);

/// log Phi(z), accurate deep into the lower tail where Phi underflows.
double log_normal_cdf(double z);

/// Inverse of normal_cdf on (0, 1).
double normal_quantile(double p);

}  // namespace ruin
