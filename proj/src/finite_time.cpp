#include "ruin/finite_time.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "ruin/errors.hpp"

namespace ruin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -kInf) return a;
  return a + std::log1p(std::exp(b - a));
}

// log(1 - e^d) for d < 0
double log_one_minus_exp(double d) { return d > -0.693 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d)); }

double safe_log(double v) { return v > 0 ? std::log(v) : -kInf; }

void require_exact_driver(const LineModel& m) {
  if (m.is_renewal()) fail(ErrorKind::UnsupportedDriver, "no exact finite-time formula for the renewal driver; use MC");
}

FiniteRuinResult exact_brownian(double m, double x, double t) {
  const double st = std::sqrt(t);
  const double A = (x + m * t) / st;
  const double C = (m * t - x) / st;
  const double log_a = log_normal_cdf(A);
  const double log_c = -2.0 * m * x + log_normal_cdf(C);
  FiniteRuinResult r;
  r.method = FiniteMethod::ExactBrownian;
  r.raw = normal_cdf(-A) + std::exp(log_c);
  r.value = clamp01(r.raw);
  r.log_value = log_add(log_normal_cdf(-A), log_c);
  // survival = Phi(A) - e^{-2mx} Phi(C); the two share a Gaussian factor when both are tiny.
  r.survival = log_c < log_a ? -std::exp(log_a) * std::expm1(log_c - log_a) : 0.0;
  if (m > 0) {
    // w = e^{-2mx} Phi(-C) - Phi(-A)
    const double l1 = -2.0 * m * x + log_normal_cdf(-C);
    const double l2 = log_normal_cdf(-A);
    r.after = l2 < l1 ? -std::exp(l1) * std::expm1(l2 - l1) : 0.0;
    r.log_after = l2 < l1 ? l1 + log_one_minus_exp(l2 - l1) : -kInf;
  } else {
    r.after = r.survival;
    r.log_after = log_c < log_a ? log_a + log_one_minus_exp(log_c - log_a) : -kInf;
  }
  return r;
}

}  // namespace

std::string_view to_string(FiniteMethod m) {
  switch (m) {
    case FiniteMethod::ExactCpe: return "exact_cpe";
    case FiniteMethod::ExactBrownian: return "exact_brownian";
    case FiniteMethod::AhAsymptotic: return "ah_asymptotic";
  }
  return "?";
}

std::string_view to_string(LawSide s) {
  return s == LawSide::ConditionedOnSurvival ? "conditioned_on_survival" : "conditioned_on_ruin";
}

double ultimate_ruin(const LineModel& model, double x) {
  require_exact_driver(model);
  if (!(x >= 0)) fail(ErrorKind::OutOfRange, "reserve must be nonnegative");
  if (!(model.drift() > 0)) return 1.0;
  return cramer_constant(model) * std::exp(-adjustment_coefficient(model) * x);
}

QuadratureResult cpe_w_direct(double lambda, double mu, double p, double x, double t, const ToleranceConfig& tol) {
  const double r = 2.0 * std::sqrt(lambda * mu * p);
  const double centre = lambda + mu * p;
  const double s_minus = centre - r;
  if (!(s_minus > 0)) fail(ErrorKind::BoundaryVelocity, "lambda = mu p: zero drift, the integral is singular");
  // q = s- + (s+ - s-) sin^2(phi/2) = centre - r cos(phi); on this path the
  // arccos angle is phi itself and b(q) = sqrt(lambda mu / p) sin(phi).
  const double bscale = std::sqrt(lambda * mu / p);
  const auto expo = [&](double q) { return (lambda - mu * p - q) * x / (2.0 * p) - q * t; };
  const double top = expo(s_minus);
  const auto integrand = [&](double phi) {
    const double q = centre - r * std::cos(phi);
    return std::exp(expo(q) - top) * std::sin(bscale * std::sin(phi) * x + phi) * r * std::sin(phi) / q;
  };
  ToleranceConfig local = tol;
  local.quad_abs_tol = 1e-300;
  local.quad_rel_tol = std::max(tol.quad_rel_tol, 1e-13);
  local.max_iterations = std::max(tol.max_iterations, 2000);
  const QuadratureResult inner = integrate(integrand, 0.0, std::numbers::pi, local);
  const double scale = std::sqrt(lambda / (mu * p)) / std::numbers::pi * std::exp(top);
  return {scale * inner.value, scale * inner.err_est};
}

double CpeContour::d() const { return sign_d == 0 ? 0.0 : sign_d * std::exp(log_abs_d); }

CpeContour cpe_contour(double lambda, double mu, double p, double x, double t, const ToleranceConfig& tol) {
  if (!(t > 0) || !(x >= 0)) fail(ErrorKind::OutOfRange, "need t > 0 and x >= 0");
  const double r = 2.0 * std::sqrt(lambda * mu * p);
  const double centre = lambda + mu * p;
  if (!(centre - r > 0)) fail(ErrorKind::BoundaryVelocity, "lambda = mu p: zero drift, the integral is singular");
  // With z = e^{i phi} the exponent of the integrand is K0 + A z + B/z and the
  // rest is rational in z, with poles at the roots of centre = r (z + 1/z)/2.
  const double A = 0.5 * r * (x / p + t);
  const double B = 0.5 * r * t;
  const double K0 = -mu * x - centre * t;
  const double z_in = (centre - std::abs(lambda - mu * p)) / r;
  const double z_out = 1.0 / z_in;
  double rho = std::sqrt(B / A);
  // Keep clear of the pole; the price is a bounded growth of the exponent.
  const double band = std::min(0.5, std::sqrt(3.0 / std::sqrt(A * B)));
  if (std::abs(rho - z_in) < band * z_in) {
    rho = (rho <= z_in || z_in * (1 + band) > 1.0) ? z_in * (1 - band) : z_in * (1 + band);
  }
  const double peak = A * rho + B / rho;
  const auto integrand = [&](double phi) {
    const std::complex<double> z = std::polar(rho, phi);
    const std::complex<double> h = (z * z - 1.0) * z / ((z - z_in) * (z - z_out));
    return (std::exp(A * z + B / z - peak) * h).real();
  };
  ToleranceConfig local = tol;
  local.quad_abs_tol = 1e-300;
  local.quad_rel_tol = std::max(tol.quad_rel_tol, 1e-13);
  local.max_iterations = std::max(tol.max_iterations, 2000);
  const QuadratureResult q = integrate(integrand, 0.0, std::numbers::pi, local);
  CpeContour out;
  out.captured = rho < z_in;
  out.radius = rho;
  out.pole = z_in;
  const double log_scale = 0.5 * std::log(lambda / (mu * p)) - std::log(std::numbers::pi) + K0 + peak;
  out.sign_d = q.value > 0 ? 1 : (q.value < 0 ? -1 : 0);
  out.log_abs_d = q.value != 0 ? log_scale + std::log(std::abs(q.value)) : -kInf;
  out.err = std::exp(log_scale) * q.err_est;
  return out;
}

FiniteRuinResult finite_ruin(const LineModel& model, double x, double t, const ToleranceConfig& tol) {
  require_exact_driver(model);
  if (!(x >= 0) || !std::isfinite(x)) fail(ErrorKind::OutOfRange, "reserve must be finite and nonnegative");
  if (!(t >= 0)) fail(ErrorKind::OutOfRange, "time must be nonnegative");
  const bool positive = model.drift() > 0;
  const double ult = ultimate_ruin(model, x);
  if (t == 0.0 || (x == 0.0 && model.is_brownian())) {
    // Brownian paths from 0 leave immediately; otherwise ruin needs positive time.
    FiniteRuinResult r;
    r.method = model.is_brownian() ? FiniteMethod::ExactBrownian : FiniteMethod::ExactCpe;
    const bool instant = x == 0.0 && model.is_brownian();
    r.raw = r.value = instant ? 1.0 : 0.0;
    r.survival = instant ? 0.0 : 1.0;
    r.after = instant ? 0.0 : ult;
    r.log_value = safe_log(r.value);
    r.log_after = safe_log(r.after);
    return r;
  }
  if (std::isinf(t)) {
    FiniteRuinResult r;
    r.method = model.is_brownian() ? FiniteMethod::ExactBrownian : FiniteMethod::ExactCpe;
    r.raw = r.value = ult;
    r.survival = 1.0 - ult;
    r.log_value = safe_log(ult);
    r.log_after = -kInf;
    return r;
  }
  if (model.is_brownian()) return exact_brownian(model.premium(), x, t);

  const auto& c = std::get<CompoundPoissonExp>(model.driver());
  const CpeContour k = cpe_contour(c.lambda, c.mu, model.premium(), x, t, tol);
  FiniteRuinResult r;
  r.method = FiniteMethod::ExactCpe;
  r.quad_err = k.err;
  // Cramer part: C e^{-gamma x} with gamma > 0, or 1 when the drift is negative.
  const double log_cramer = positive ? std::log(cramer_constant(model)) - adjustment_coefficient(model, tol) * x : 0.0;
  const double cramer = std::exp(log_cramer);
  const double d = k.d();
  // psi = cramer - w and survival = 1 - cramer + w for either sign of the drift.
  const double rel = k.sign_d != 0 ? k.log_abs_d - log_cramer : -kInf;
  const auto log_cramer_minus = [&] { return rel < 0 ? log_cramer + log_one_minus_exp(rel) : -kInf; };
  double w;
  if (k.captured) {
    w = cramer + d;
    r.log_value = k.sign_d < 0 ? k.log_abs_d : -kInf;
    r.log_after = k.sign_d < 0 ? log_cramer_minus() : log_add(log_cramer, k.log_abs_d);
  } else {
    w = d;
    r.log_after = k.sign_d > 0 ? k.log_abs_d : -kInf;
    r.log_value = k.sign_d > 0 ? log_cramer_minus() : log_add(log_cramer, k.log_abs_d);
  }
  r.raw = cramer - w;
  r.value = clamp01(r.raw);
  r.after = std::max(w, 0.0);
  r.survival = clamp01(1.0 - cramer + w);
  return r;
}

FiniteRuinResult finite_ruin(const TiltedModel& model, double x, double t, const ToleranceConfig& tol) {
  return finite_ruin(model.model, x, t, tol);
}

double ruin_after(const LineModel& model, double x, double t, const ToleranceConfig& tol) {
  return std::max(0.0, finite_ruin(model, x, t, tol).after);
}

AhBranches ah_branches(const LineModel& model, double x, double t, const ToleranceConfig& tol) {
  require_exact_driver(model);
  if (!(x > 0) || !(t > 0)) fail(ErrorKind::OutOfRange, "need x > 0 and t > 0");
  AhBranches b;
  b.v = x / t;
  if (!(b.v < -model.v_lower())) fail(ErrorKind::OutOfRange, "velocity beyond -v_lower");
  if (model.drift() > 0) {
    b.zeta = adjustment_coefficient(model, tol);
    b.C = cramer_constant(model);
  }
  b.critical_velocity = -model.kappa1(-b.zeta);
  if (std::abs(b.v - b.critical_velocity) <= 1e-6 * std::max(1.0, std::abs(b.critical_velocity))) {
    fail(ErrorKind::BoundaryVelocity, "x/t sits on the critical velocity");
  }
  b.regime = b.v < b.critical_velocity ? Regime::BelowCritical : Regime::AboveCritical;
  b.saddle = saddle(model, b.v, tol);
  const double th = b.saddle.theta_v;
  const double thc = b.saddle.theta_v_conj;
  if (th == 0.0 || thc == 0.0) fail(ErrorKind::BoundaryVelocity, "c(v) is singular at this velocity");
  const double cv = (thc - th) / (th * thc);
  b.D = cv / std::sqrt(2.0 * std::numbers::pi * b.saddle.kpp);
  b.log_cramer = std::log(b.C) - b.zeta * x;
  b.log_saddle = std::log(std::abs(b.D)) - 0.5 * std::log(t) - t * b.saddle.kstar;
  b.cramer_branch = std::exp(b.log_cramer);
  b.saddle_branch = std::exp(b.log_saddle);
  return b;
}

FiniteRuinResult ah_asymptotic(const LineModel& model, double x, double t, const ToleranceConfig& tol) {
  const AhBranches b = ah_branches(model, x, t, tol);
  FiniteRuinResult r;
  r.method = FiniteMethod::AhAsymptotic;
  r.raw = b.psi();
  r.value = clamp01(r.raw);
  r.after = b.after();
  r.log_value = b.log_psi();
  r.log_after = b.log_after();
  r.survival = 1.0 - r.value;
  return r;
}

double LimitLaw::density(double y) const {
  if (side == LawSide::ConditionedOnSurvival) {
    if (y <= 0) return 0.0;
    return (std::exp(-theta_v * y) - std::exp(-theta_v_conj * y)) / c_v;
  }
  const double norm = std::abs(c_v);
  return y > 0 ? std::exp(-theta_v_conj * y) / norm : std::exp(-theta_v * y) / norm;
}

double LimitLaw::cdf(double y) const {
  if (side == LawSide::ConditionedOnSurvival) {
    if (y <= 0) return 0.0;
    return (-std::expm1(-theta_v * y) / theta_v + std::expm1(-theta_v_conj * y) / theta_v_conj) / c_v;
  }
  const double norm = std::abs(c_v);
  if (y < 0) return std::exp(-theta_v * y) / (-theta_v) / norm;
  return (1.0 / (-theta_v) - std::expm1(-theta_v_conj * y) / theta_v_conj) / norm;
}

LimitLaw limit_law(const LineModel& model, double v, LawSide side, const ToleranceConfig& tol) {
  require_exact_driver(model);
  const double drift = model.drift();
  if (!(drift < 0)) fail(ErrorKind::OutOfRange, "limit laws need kappa'(0) < 0");
  if (side == LawSide::ConditionedOnSurvival && !(v > 0 && v < -drift)) {
    fail(ErrorKind::OutOfRange, "survival side needs 0 < v < -kappa'(0)");
  }
  if (side == LawSide::ConditionedOnRuin && !(v > -drift && v < -model.v_lower())) {
    fail(ErrorKind::OutOfRange, "ruin side needs -kappa'(0) < v < -v_lower");
  }
  const SaddleData s = saddle(model, v, tol);
  if (side == LawSide::ConditionedOnSurvival && !(s.theta_v_conj > s.theta_v && s.theta_v > 0)) {
    fail(ErrorKind::OutOfRange, "survival law needs theta'_v > theta_v > 0");
  }
  if (side == LawSide::ConditionedOnRuin && !(s.theta_v < 0 && s.theta_v_conj > 0)) {
    fail(ErrorKind::OutOfRange, "ruin law needs theta_v < 0 < theta'_v");
  }
  const double cv = (s.theta_v_conj - s.theta_v) / (s.theta_v * s.theta_v_conj);
  return LimitLaw{side, v, s.theta_v, s.theta_v_conj, cv};
}

double laplace_ruin(const LineModel& model, double theta) {
  require_exact_driver(model);
  if (!model.in_domain(theta)) fail(ErrorKind::OutOfDomain, "theta outside the cumulant domain");
  // 1/theta - kappa'(0)/kappa(theta) with the removable 0/0 at theta = 0 cancelled by hand.
  double denom;
  double numer;
  if (const auto* c = std::get_if<CompoundPoissonExp>(&model.driver())) {
    numer = c->lambda;
    denom = c->mu * (model.premium() * (c->mu + theta) - c->lambda);
  } else {
    numer = 1.0;
    denom = theta + 2.0 * model.premium();
  }
  if (std::abs(denom) <= 1e-14 * std::max(1.0, std::abs(numer))) {
    fail(ErrorKind::BoundaryVelocity, "Laplace transform has a pole at -gamma");
  }
  return numer / denom;
}

double laplace_survival(const LineModel& model, double theta) {
  require_exact_driver(model);
  const double k = model.kappa(theta);
  if (k == 0.0) fail(ErrorKind::BoundaryVelocity, "kappa vanishes; survival transform has a pole");
  return model.drift() / k;
}

}  // namespace ruin
