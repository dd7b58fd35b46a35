#include "ruin/models.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "ruin/errors.hpp"

namespace ruin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite_positive(double v) { return std::isfinite(v) && v > 0; }

void cross_check(double closed, double numeric, const char* what) {
  if (std::abs(closed - numeric) > 1e-10 * std::max(1.0, std::abs(closed))) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": closed form " << closed << " vs root " << numeric;
    fail(ErrorKind::CrossCheckFailed, os.str());
  }
}

}  // namespace

// --- Distribution ------------------------------------------------------------

Distribution Distribution::exponential(double rate) {
  if (!finite_positive(rate)) fail(ErrorKind::InvalidModel, "exponential rate must be positive");
  Distribution d;
  d.kind_ = Kind::Exponential;
  d.name_ = "exp";
  d.a_ = rate;
  d.mgf_sup_ = rate;
  d.mean_ = 1.0 / rate;
  return d;
}

Distribution Distribution::deterministic(double value) {
  if (!(std::isfinite(value) && value >= 0)) fail(ErrorKind::InvalidModel, "deterministic value must be >= 0");
  Distribution d;
  d.kind_ = Kind::Deterministic;
  d.name_ = "det";
  d.a_ = value;
  d.mgf_sup_ = kInf;
  d.mean_ = value;
  return d;
}

Distribution Distribution::gamma(double shape, double rate) {
  if (!finite_positive(shape) || !finite_positive(rate)) fail(ErrorKind::InvalidModel, "gamma needs shape, rate > 0");
  Distribution d;
  d.kind_ = Kind::Gamma;
  d.name_ = "gamma";
  d.a_ = shape;
  d.b_ = rate;
  d.mgf_sup_ = rate;
  d.mean_ = shape / rate;
  return d;
}

Distribution Distribution::custom(std::string name, std::function<double(double)> mgf, double mgf_sup, double mean,
                                  std::function<double(Substream&)> sampler) {
  if (!mgf || !sampler) fail(ErrorKind::InvalidModel, "custom distribution needs mgf and sampler");
  if (!(mgf_sup >= 0) || !(mean >= 0)) fail(ErrorKind::InvalidModel, "custom distribution needs mgf_sup >= 0, mean >= 0");
  Distribution d;
  d.kind_ = Kind::Custom;
  d.name_ = std::move(name);
  d.mgf_sup_ = mgf_sup;
  d.mean_ = mean;
  d.custom_mgf_ = std::move(mgf);
  d.custom_sampler_ = std::move(sampler);
  return d;
}

double Distribution::mgf(double s) const {
  if (s >= mgf_sup_) return kInf;
  switch (kind_) {
    case Kind::Exponential: return a_ / (a_ - s);
    case Kind::Deterministic: return std::exp(s * a_);
    case Kind::Gamma: return std::pow(b_ / (b_ - s), a_);
    case Kind::Custom: return custom_mgf_(s);
  }
  return kInf;
}

double Distribution::mean() const { return mean_; }

double Distribution::sample(Substream& rng) const {
  switch (kind_) {
    case Kind::Exponential: return rng.exponential() / a_;
    case Kind::Deterministic: return a_;
    case Kind::Gamma: return std::gamma_distribution<double>(a_, 1.0 / b_)(rng);
    case Kind::Custom: return custom_sampler_(rng);
  }
  return 0.0;
}

Distribution Distribution::tilted(double s) const {
  switch (kind_) {
    case Kind::Exponential:
      if (s >= a_) fail(ErrorKind::OutOfDomain, "tilt beyond the exponential mgf domain");
      return exponential(a_ - s);
    case Kind::Deterministic: return *this;
    case Kind::Gamma:
      if (s >= b_) fail(ErrorKind::OutOfDomain, "tilt beyond the gamma mgf domain");
      return gamma(a_, b_ - s);
    case Kind::Custom: break;
  }
  fail(ErrorKind::UnsupportedDriver, "custom distribution '" + name_ + "' cannot be tilted");
}

std::string Distribution::describe() const {
  std::ostringstream os;
  os.precision(12);
  switch (kind_) {
    case Kind::Exponential: os << "exp:" << a_; break;
    case Kind::Deterministic: os << "det:" << a_; break;
    case Kind::Gamma: os << "gamma:" << a_ << ":" << b_; break;
    case Kind::Custom: os << "custom:" << name_; break;
  }
  return os.str();
}

// --- drivers and line models --------------------------------------------------

std::string driver_name(const ClaimDriver& driver) {
  if (std::holds_alternative<CompoundPoissonExp>(driver)) return "cpe";
  if (std::holds_alternative<StandardBrownian>(driver)) return "brownian";
  return "renewal";
}

void validate_driver(const ClaimDriver& driver) {
  if (const auto* c = std::get_if<CompoundPoissonExp>(&driver)) {
    if (!finite_positive(c->lambda) || !finite_positive(c->mu)) {
      fail(ErrorKind::InvalidModel, "compound Poisson driver needs lambda > 0 and mu > 0");
    }
  } else if (const auto* r = std::get_if<Renewal>(&driver)) {
    if (!(r->interarrival.mean() > 0)) fail(ErrorKind::InvalidModel, "interarrival mean must be positive");
  }
}

LineModel::LineModel(ClaimDriver driver, double p) : driver_(std::move(driver)), p_(p) {
  validate_driver(driver_);
  if (!std::isfinite(p_)) fail(ErrorKind::InvalidModel, "premium rate must be finite");
  if (!is_brownian() && !(p_ > 0)) fail(ErrorKind::InvalidModel, "premium rate must be positive");
}

void LineModel::require_cumulant() const {
  if (is_renewal()) fail(ErrorKind::UnsupportedDriver, "the renewal driver has no cumulant exponent");
}

double LineModel::kappa(double theta) const {
  require_cumulant();
  if (!in_domain(theta)) fail(ErrorKind::OutOfDomain, "theta below the cumulant domain");
  if (theta == 0.0) return 0.0;
  if (const auto* c = std::get_if<CompoundPoissonExp>(&driver_)) return p_ * theta - c->lambda * theta / (c->mu + theta);
  return 0.5 * theta * theta + p_ * theta;
}

double LineModel::kappa1(double theta) const {
  require_cumulant();
  if (!in_domain(theta)) fail(ErrorKind::OutOfDomain, "theta below the cumulant domain");
  if (const auto* c = std::get_if<CompoundPoissonExp>(&driver_)) {
    const double d = c->mu + theta;
    return p_ - c->lambda * c->mu / (d * d);
  }
  return theta + p_;
}

double LineModel::kappa2(double theta) const {
  require_cumulant();
  if (!in_domain(theta)) fail(ErrorKind::OutOfDomain, "theta below the cumulant domain");
  if (const auto* c = std::get_if<CompoundPoissonExp>(&driver_)) {
    const double d = c->mu + theta;
    return 2.0 * c->lambda * c->mu / (d * d * d);
  }
  return 1.0;
}

double LineModel::theta_lower() const {
  require_cumulant();
  if (const auto* c = std::get_if<CompoundPoissonExp>(&driver_)) return -c->mu;
  return -kInf;
}

double LineModel::v_lower() const {
  require_cumulant();
  return -kInf;
}

double LineModel::inverse_slope(double slope) const {
  require_cumulant();
  if (const auto* c = std::get_if<CompoundPoissonExp>(&driver_)) {
    if (!(slope < p_)) fail(ErrorKind::OutOfRange, "kappa' never reaches the requested slope");
    return -c->mu + std::sqrt(c->lambda * c->mu / (p_ - slope));
  }
  return slope - p_;
}

TwoLineModel make_two_line(const ClaimDriver& driver, double p1, double p2) {
  if (!(p1 > p2)) fail(ErrorKind::InvalidModel, "p1 > p2 is required");
  if (!(p2 > 0)) fail(ErrorKind::InvalidModel, "premium rates must be positive");
  LineModel l1(driver, p1);
  LineModel l2(driver, p2);
  double a_bar = 1.0;
  if (!l2.is_renewal()) {
    const double vl = l2.v_lower();
    a_bar = std::isfinite(vl) ? 1.0 + (p1 - p2) / vl : 1.0;
  }
  return TwoLineModel{driver, p1, p2, std::move(l1), std::move(l2), a_bar};
}

CanonicalCoordinates scale_to_canonical(double u1, double u2, double c1, double c2, double delta1, double delta2) {
  if (!(delta1 > 0) || !(delta2 > 0) || std::abs(delta1 + delta2 - 1.0) > 1e-12) {
    fail(ErrorKind::InvalidProportions, "proportions must be positive and sum to 1");
  }
  return {u1 / delta1, u2 / delta2, c1 / delta1, c2 / delta2};
}

double cumulant(const LineModel& model, double theta) { return model.kappa(theta); }

namespace {

// Root of kappa on the far side of the minimum, found by bracketing.
double lower_root(const LineModel& m, const ToleranceConfig& tol) {
  const double tmin = m.kappa_argmin();
  if (!(m.kappa(tmin) < 0)) fail(ErrorKind::NoAdjustment, "kappa has no negative root");
  const double tl = m.theta_lower();
  double lo = tmin;
  for (int k = 1; k <= 200; ++k) {
    lo = std::isfinite(tl) ? tl + (tmin - tl) * std::ldexp(1.0, -k) : tmin - std::ldexp(1.0, k - 1);
    if (m.kappa(lo) > 0) break;
    if (k == 200) fail(ErrorKind::NoAdjustment, "no sign change below the kappa minimum");
  }
  return root_solve([&](double th) { return m.kappa(th); }, {lo, tmin}, tol);
}

}  // namespace

double adjustment_coefficient(const LineModel& model, const ToleranceConfig& tol) {
  if (model.is_renewal()) {
    const auto& r = std::get<Renewal>(model.driver());
    return renewal_adjustment(r, model.premium(), tol);
  }
  if (!(model.drift() > 0)) fail(ErrorKind::NoAdjustment, "net-profit condition fails");
  double closed;
  if (const auto* c = std::get_if<CompoundPoissonExp>(&model.driver())) {
    closed = c->mu - c->lambda / model.premium();
  } else {
    closed = 2.0 * model.premium();
  }
  cross_check(closed, -lower_root(model, tol), "adjustment coefficient");
  return closed;
}

double cramer_constant(const LineModel& model) {
  if (model.is_renewal()) fail(ErrorKind::UnsupportedDriver, "no closed-form constant for the renewal driver");
  if (!(model.drift() > 0)) return 1.0;
  if (const auto* c = std::get_if<CompoundPoissonExp>(&model.driver())) return c->lambda / (c->mu * model.premium());
  return 1.0;
}

double conjugate_root(const LineModel& m, double theta0, const ToleranceConfig& tol) {
  const double tmin = m.kappa_argmin();
  const double target = m.kappa(theta0);
  const double gap = std::abs(theta0 - tmin);
  if (gap == 0.0) return theta0;
  const auto g = [&](double th) { return m.kappa(th) - target; };
  double far = tmin;
  const double tl = m.theta_lower();
  for (int k = 0; k <= 200; ++k) {
    if (theta0 < tmin) {
      far = tmin + gap * std::ldexp(1.0, k);
    } else {
      far = std::isfinite(tl) ? tl + (tmin - tl) * std::ldexp(1.0, -k - 1) : tmin - gap * std::ldexp(1.0, k);
    }
    if (g(far) > 0) break;
    if (k == 200) fail(ErrorKind::NoConjugate, "kappa does not return to the starting level");
  }
  // The minimum itself sits strictly below the level, so [tmin, far] brackets.
  return root_solve(g, {std::min(tmin, far), std::max(tmin, far)}, tol);
}

AdjustmentData adjustment(const TwoLineModel& model2, const ToleranceConfig& tol) {
  if (model2.line1.is_renewal()) fail(ErrorKind::UnsupportedDriver, "use renewal_exponents for the renewal driver");
  const LineModel& l1 = model2.line1;
  const LineModel& l2 = model2.line2;
  if (!(l1.drift() > 0) || !(l2.drift() > 0)) fail(ErrorKind::NoAdjustment, "net-profit condition fails on a line");
  AdjustmentData d{};
  d.gamma1 = adjustment_coefficient(l1, tol);
  d.gamma2 = adjustment_coefficient(l2, tol);
  d.zeta1 = d.gamma1;
  d.zeta2 = d.gamma2;
  d.C1 = cramer_constant(l1);
  d.C2 = cramer_constant(l2);
  if (!(d.gamma1 > d.gamma2 && d.gamma2 > 0)) fail(ErrorKind::NoAdjustment, "expected gamma1 > gamma2 > 0");

  const double slope = l1.kappa1(-d.gamma2);
  if (slope <= 0) {
    d.gamma3 = d.gamma2;
  } else {
    const double numeric = -conjugate_root(l1, -d.gamma2, tol);
    double closed;
    if (const auto* c = std::get_if<CompoundPoissonExp>(&model2.driver)) {
      const double rho = c->lambda / c->mu;
      closed = d.gamma2 + (c->mu / model2.p2) * (rho - model2.p2 * model2.p2 / model2.p1);
    } else {
      closed = 2.0 * model2.p1 - 2.0 * model2.p2;
    }
    cross_check(closed, numeric, "gamma3");
    d.gamma3 = closed;
  }
  d.gamma_tilde = d.gamma3 - d.gamma2;
  // With gamma3 = gamma2 line 1 is ruined surely under the gamma2 tilt, so the
  // tilted constant is 1 and the product collapses to C2.
  d.C2_hat = d.gamma3 > d.gamma2 ? -d.C2 * slope / l1.kappa1(-d.gamma3) : d.C2;
  return d;
}

TiltedModel tilt(const LineModel& model, double c) {
  if (!std::isfinite(c) || !model.in_domain(c)) fail(ErrorKind::OutOfDomain, "tilt outside the cumulant domain");
  if (c == 0.0) return TiltedModel{model, 0.0, model};
  if (const auto* cp = std::get_if<CompoundPoissonExp>(&model.driver())) {
    CompoundPoissonExp t{cp->lambda * cp->mu / (cp->mu + c), cp->mu + c};
    return TiltedModel{model, c, LineModel(t, model.premium())};
  }
  return TiltedModel{model, c, LineModel(StandardBrownian{}, model.premium() + c)};
}

SaddleData saddle(const LineModel& model, double v, const ToleranceConfig& tol) {
  if (!(v > 0) || !std::isfinite(v) || !(v < -model.v_lower())) fail(ErrorKind::OutOfRange, "velocity outside (0, -v_lower)");
  SaddleData s{};
  s.v = v;
  s.theta_v = model.inverse_slope(-v);
  s.theta_v_conj = conjugate_root(model, s.theta_v, tol);
  if (!(s.theta_v_conj > s.theta_v)) fail(ErrorKind::NoConjugate, "conjugate shift not above the saddle");
  s.kstar = -v * s.theta_v - model.kappa(s.theta_v);
  s.kpp = model.kappa2(s.theta_v);
  return s;
}

double joint_cumulant(const TwoLineModel& model2, double theta1, double theta2) {
  return model2.line1.kappa(theta1 + theta2) - theta2 * (model2.p1 - model2.p2);
}

double renewal_adjustment(const Renewal& driver, double p, const ToleranceConfig& tol) {
  if (!(p > 0)) fail(ErrorKind::InvalidModel, "premium rate must be positive");
  const Distribution& zeta = driver.interarrival;
  const Distribution& sigma = driver.claim;
  if (!(p * zeta.mean() > sigma.mean())) fail(ErrorKind::NoAdjustment, "net-profit condition fails");
  const double sup = sigma.mgf_sup();
  if (!(sup > 0)) fail(ErrorKind::NoAdjustment, "claim mgf is infinite on (0, inf)");
  const auto f = [&](double g) { return std::log(zeta.mgf(-g * p)) + std::log(sigma.mgf(g)); };
  double lo = 1e-8 * std::min(1.0, sup);
  for (int k = 0; f(lo) >= 0; ++k) {
    if (k == 60) fail(ErrorKind::NoAdjustment, "Lundberg function not negative near 0");
    lo *= 0.5;
  }
  double hi = lo;
  for (int k = 1;; ++k) {
    hi = std::isfinite(sup) ? sup * (1.0 - std::ldexp(1.0, -k)) : std::ldexp(1.0, k - 10);
    const double fh = f(hi);
    if (fh > 0) break;
    if (k == 1000 || (std::isfinite(sup) && k >= 60)) fail(ErrorKind::NoAdjustment, "no sign change in the claim mgf domain");
  }
  return root_solve(f, {lo, hi}, tol);
}

}  // namespace ruin
