#include "ruin/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "ruin/errors.hpp"

namespace ruin {

void ToleranceConfig::validate() const {
  if (!(root_abs_tol > 0) || !(quad_abs_tol > 0) || !(quad_rel_tol >= 0) || max_iterations < 1) {
    fail(ErrorKind::InvalidConfig, "tolerances must be positive and max_iterations >= 1");
  }
}

double root_solve(const ScalarFunction& f, Interval bracket, const ToleranceConfig& tol) {
  tol.validate();
  double lo = bracket.lo;
  double hi = bracket.hi;
  if (lo > hi) std::swap(lo, hi);
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::isnan(flo) || std::isnan(fhi) || (flo > 0) == (fhi > 0)) {
    fail(ErrorKind::NoSignChange, "f(" + std::to_string(lo) + ")=" + std::to_string(flo) + ", f(" +
                                      std::to_string(hi) + ")=" + std::to_string(fhi));
  }
  for (int it = 0; it < tol.max_iterations; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (hi - lo <= tol.root_abs_tol || mid <= lo || mid >= hi) return mid;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  fail(ErrorKind::MaxIterations, "bisection did not reach root_abs_tol");
}

namespace {

// 15-point Kronrod nodes on [-1, 1] (non-negative half) with the embedded 7-point Gauss weights.
constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, err, absval;
  bool operator<(const Panel& o) const { return err < o.err; }
};

Panel gk15(const ScalarFunction& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWk[7];
  double gauss = fc * kWg[3];
  double absval = std::abs(fc) * kWk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kron += kWk[j] * (f1 + f2);
    absval += kWk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  Panel p{a, b, kron * h, std::abs((kron - gauss) * h), absval * std::abs(h)};
  // Kronrod minus Gauss overstates the error for smooth integrands; this is the
  // usual QUADPACK rescaling, floored at the roundoff level of the panel.
  if (p.err > 0) p.err = p.err * std::min(1.0, std::pow(200.0 * p.err / std::max(p.absval, 1e-300), 1.5));
  p.err = std::max(p.err, 50.0 * std::numeric_limits<double>::epsilon() * p.absval);
  return p;
}

}  // namespace

QuadratureResult integrate(const ScalarFunction& f, double a, double b, const ToleranceConfig& tol) {
  tol.validate();
  if (!(a < b)) {
    if (a == b) return {};
    fail(ErrorKind::OutOfDomain, "integrate requires a < b");
  }
  std::priority_queue<Panel> heap;
  heap.push(gk15(f, a, b));
  double value = heap.top().value;
  double err = heap.top().err;
  double absval = heap.top().absval;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int it = 0;; ++it) {
    const double target = std::max(tol.quad_abs_tol, tol.quad_rel_tol * std::abs(value));
    if (err <= target) break;
    // Nothing left to gain once the estimate is at the roundoff floor of the whole sum.
    if (err <= 100.0 * eps * absval) break;
    if (it >= tol.max_iterations) {
      fail(ErrorKind::MaxIterations, "adaptive quadrature exceeded its panel budget (err=" + std::to_string(err) + ")");
    }
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = gk15(f, worst.a, mid);
    Panel right = gk15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    err += left.err + right.err - worst.err;
    absval += left.absval + right.absval - worst.absval;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum from the panels so the running update does not accumulate drift.
  double v = 0.0;
  double e = 0.0;
  while (!heap.empty()) {
    v += heap.top().value;
    e += heap.top().err;
    heap.pop();
  }
  return {v, e};
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double log_normal_cdf(double z) {
  if (z > -30.0) return std::log(normal_cdf(z));
  // Asymptotic series of the Mills ratio for the far lower tail.
  const double z2 = z * z;
  double sum = 1.0;
  double term = 1.0;
  for (int k = 1; k < 12; ++k) {
    term *= -(2.0 * k - 1.0) / z2;
    sum += term;
  }
  return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(sum);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorKind::OutOfRange, "normal_quantile needs p in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

}  // namespace ruin
