#include "ruin/twodim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ruin/errors.hpp"
#include "ruin/finite_time.hpp"

namespace ruin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_log(double v) { return v > 0 ? std::log(v) : -kInf; }

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -kInf) return a;
  return a + std::log1p(std::exp(b - a));
}

void require_exact_driver(const TwoLineModel& m) {
  if (m.line1.is_renewal()) fail(ErrorKind::UnsupportedDriver, "renewal driver has no exact engine; use MC");
}

void require_upper(double x1, double x2) {
  if (!(x1 >= 0) || !(x2 >= 0) || !std::isfinite(x1) || !std::isfinite(x2)) {
    fail(ErrorKind::OutOfRange, "reserves must be finite and nonnegative");
  }
  if (!(x2 > x1)) fail(ErrorKind::OutOfRange, "expansions need x2 > x1");
}

// A one-dimensional finite-time factor together with its log.
struct Piece {
  double value = 0.0;
  double log = -kInf;
  double err = 0.0;
};

Piece psi_piece(const LineModel& m, double x, double t, Pieces pieces, const ToleranceConfig& tol) {
  const FiniteRuinResult r = pieces == Pieces::Exact ? finite_ruin(m, x, t, tol) : ah_asymptotic(m, x, t, tol);
  return {r.value, r.log_value, r.quad_err};
}

Piece after_piece(const LineModel& m, double x, double t, Pieces pieces, const ToleranceConfig& tol) {
  const FiniteRuinResult r = pieces == Pieces::Exact ? finite_ruin(m, x, t, tol) : ah_asymptotic(m, x, t, tol);
  return {r.after, r.log_after, r.quad_err};
}

// P(tau > t). With a positive drift it is bounded below by 1 - C; otherwise it
// equals P(t < tau < inf) and is best taken from the after-branch.
Piece survival_piece(const LineModel& m, double x, double t, Pieces pieces, const ToleranceConfig& tol) {
  const FiniteRuinResult r = pieces == Pieces::Exact ? finite_ruin(m, x, t, tol) : ah_asymptotic(m, x, t, tol);
  if (m.drift() > 0) {
    const double s = pieces == Pieces::Exact ? r.survival : 1.0 - r.value;
    return {s, safe_log(s), r.quad_err};
  }
  return {r.after, r.log_after, r.quad_err};
}

double log_psi_ult(const LineModel& m, double x) {
  if (!(m.drift() > 0)) return 0.0;
  return std::log(cramer_constant(m)) - adjustment_coefficient(m) * x;
}

// Splits on v against a branch velocity, refusing inside the guard band.
bool above(double v, double boundary, const char* what) {
  if (std::abs(v - boundary) <= 1e-6 * std::max(1.0, std::abs(boundary))) {
    std::ostringstream os;
    os << "v = " << v << " sits on the branch velocity of " << what;
    fail(ErrorKind::BoundaryVelocity, os.str());
  }
  return v > boundary;
}

// c_i(v, c) with theta_v and its conjugate under kappa_i.
double c_norm(double theta_v, double theta_conj, double c) {
  const double n = (theta_conj - theta_v) / ((theta_conj + c) * (theta_v + c));
  if (!std::isfinite(n) || n == 0.0) fail(ErrorKind::BoundaryVelocity, "normalizer c_i(v, c) is singular");
  return n;
}

ExpansionTerms prepare(const TwoLineModel& model2, double x1, double x2, Event event) {
  require_exact_driver(model2);
  require_upper(x1, x2);
  ExpansionTerms e;
  e.event = event;
  e.T = crossing_time(x1, x2, model2.p1, model2.p2);
  e.velocity = x2 / e.T;
  const ConePartition part = partition(model2);
  e.cone = classify(model2, part, x1, x2, event == Event::And ? PartitionKind::And : PartitionKind::Sim);
  return e;
}

void finish(ExpansionTerms& e, const Piece& p1, double log_factor2, const Piece& p2) {
  e.term1 = p1.value;
  e.log_term1 = p1.log;
  e.log_term2 = log_factor2 + p2.log;
  e.term2 = std::exp(e.log_term2);
}

}  // namespace

std::string_view to_string(Event e) {
  switch (e) {
    case Event::Or: return "or";
    case Event::Sim: return "sim";
    case Event::And: return "and";
    case Event::Line1: return "line1";
    case Event::Line2: return "line2";
  }
  return "?";
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Exact: return "exact";
    case Method::TwoTerm: return "two_term";
    case Method::Leading: return "leading";
    case Method::MC: return "mc";
  }
  return "?";
}

Event parse_event(std::string_view s) {
  for (Event e : {Event::Or, Event::Sim, Event::And, Event::Line1, Event::Line2}) {
    if (s == to_string(e)) return e;
  }
  fail(ErrorKind::InvalidConfig, "unknown event '" + std::string(s) + "'");
}

Method parse_method(std::string_view s) {
  if (s == "twoterm" || s == "two-term") return Method::TwoTerm;
  for (Method m : {Method::Exact, Method::TwoTerm, Method::Leading, Method::MC}) {
    if (s == to_string(m)) return m;
  }
  fail(ErrorKind::InvalidConfig, "unknown method '" + std::string(s) + "'");
}

void RuinQuery::validate() const {
  if (!(x1 >= 0) || !(x2 >= 0) || !std::isfinite(x1) || !std::isfinite(x2)) {
    fail(ErrorKind::InvalidConfig, "reserves must be finite and nonnegative");
  }
}

double ExpansionTerms::log_total() const { return log_add(log_term1, log_term2); }

BrownianClosedForm brownian_closed_form(double p1, double p2, double x1, double x2) {
  if (!(x2 > x1)) fail(ErrorKind::OutOfRange, "closed forms need x2 > x1");
  const double T = (x2 - x1) / (p1 - p2);
  const double st = std::sqrt(T);
  const auto a = [&](double x, double p) { return (x + p * T) / st; };
  const auto Phi = [](double z) { return normal_cdf(z); };
  const double q1 = p1 - 2 * p2;
  const double q2 = p2 - 2 * p1;
  BrownianClosedForm f{};
  f.or_value = Phi(-a(x1, p1)) + std::exp(-2 * p1 * x1) * Phi(a(-x1, p1)) +
               std::exp(-2 * p2 * x2) * (Phi(a(x1, q1)) - std::exp(-2 * x1 * q1) * Phi(a(-x1, q1)));
  f.sim_value = Phi(-a(x2, p2)) + std::exp(-2 * p2 * x2) * Phi(a(-x2, p2)) +
                std::exp(-2 * p1 * x1) * (Phi(a(x2, q2)) - std::exp(-2 * x2 * q2) * Phi(a(-x2, q2)));
  f.and_value = -Phi(-a(x1, p1)) + std::exp(-2 * p1 * x1) * Phi(-a(-x1, p1)) +
                std::exp(-2 * p2 * x2) * (std::exp(-2 * x1 * q1) * Phi(a(-x1, q1)) + Phi(-a(x1, q1)));
  return f;
}

ExactValues exact_all(const TwoLineModel& model2, double x1, double x2, const ToleranceConfig& tol) {
  require_exact_driver(model2);
  if (!(x1 >= 0) || !(x2 >= 0) || !std::isfinite(x1) || !std::isfinite(x2)) {
    fail(ErrorKind::OutOfRange, "reserves must be finite and nonnegative");
  }
  const LineModel& l1 = model2.line1;
  const LineModel& l2 = model2.line2;
  ExactValues e;
  e.psi1 = ultimate_ruin(l1, x1);
  e.psi2 = ultimate_ruin(l2, x2);
  const double lp1 = log_psi_ult(l1, x1);
  const double lp2 = log_psi_ult(l2, x2);
  if (!(x2 > x1)) {
    // Line 2 never rises above line 1.
    e.or_value = e.psi2;
    e.sim_value = e.and_value = e.psi1;
    e.log_or = lp2;
    e.log_sim = e.log_and = lp1;
    e.quad_err = 16 * std::numeric_limits<double>::epsilon() * (e.psi1 + e.psi2);
    return e;
  }
  const AdjustmentData d = adjustment(model2, tol);
  e.T = crossing_time(x1, x2, model2.p1, model2.p2);
  const double T = e.T;

  // OR: line 1 before T, then line 2 from X2(T) = X1(T) under the gamma2 tilt.
  const FiniteRuinResult r1 = finite_ruin(l1, x1, T, tol);
  const LineModel t12 = tilt(l1, -d.gamma2).model;
  const FiniteRuinResult s12 = finite_ruin(t12, x1, T, tol);
  const Piece surv12 = t12.drift() > 0 ? Piece{s12.survival, safe_log(s12.survival), s12.quad_err}
                                        : Piece{s12.after, s12.log_after, s12.quad_err};
  e.or_value = r1.value + e.psi2 * surv12.value;
  e.log_or = log_add(r1.log_value, lp2 + surv12.log);

  // SIM: line 2 before T, then line 1 under the gamma1 tilt, whose line-2
  // drift is always negative.
  const FiniteRuinResult r2 = finite_ruin(l2, x2, T, tol);
  const FiniteRuinResult s21 = finite_ruin(tilt(l2, -d.gamma1).model, x2, T, tol);
  e.sim_value = r2.value + e.psi1 * s21.after;
  e.log_sim = log_add(r2.log_value, lp1 + s21.log_after);

  // AND: line 1 ruined after T, or before T with line 2 following later.
  e.and_value = r1.after + e.psi2 * s12.value;
  e.log_and = log_add(r1.log_after, lp2 + s12.log_value);

  e.or_value = std::clamp(e.or_value, 0.0, 1.0);
  e.sim_value = std::clamp(e.sim_value, 0.0, 1.0);
  e.and_value = std::clamp(e.and_value, 0.0, 1.0);
  e.quad_err = r1.quad_err + r2.quad_err + e.psi2 * s12.quad_err + e.psi1 * s21.quad_err;
  // Rounding of the special functions and of the sums above; never report zero.
  e.quad_err += 16 * std::numeric_limits<double>::epsilon() * (e.psi1 + e.psi2 + r1.value + r1.after + r2.value);

  if (l1.is_brownian()) {
    const BrownianClosedForm f = brownian_closed_form(model2.p1, model2.p2, x1, x2);
    e.closed_form_diff = std::max({std::abs(f.or_value - e.or_value), std::abs(f.sim_value - e.sim_value),
                                   std::abs(f.and_value - e.and_value)});
    if (e.closed_form_diff > 1e-8) {
      std::ostringstream os;
      os.precision(17);
      os << "closed forms and tilted assembly differ by " << e.closed_form_diff << " at (" << x1 << ", " << x2 << ")";
      fail(ErrorKind::CrossCheckFailed, os.str());
    }
  }
  return e;
}

RuinEstimate exact(const TwoLineModel& model2, const RuinQuery& query, const ToleranceConfig& tol) {
  query.validate();
  const ExactValues e = exact_all(model2, query.x1, query.x2, tol);
  RuinEstimate r;
  r.method = Method::Exact;
  r.quad_err = e.quad_err;
  if (!(query.x2 > query.x1)) r.cone = ConeLabel::LowerCone;
  switch (query.event) {
    case Event::Or: r.value = e.or_value; r.log_value = e.log_or; break;
    case Event::Sim: r.value = e.sim_value; r.log_value = e.log_sim; break;
    case Event::And: r.value = e.and_value; r.log_value = e.log_and; break;
    case Event::Line1: r.value = e.psi1; r.log_value = std::log(e.psi1); break;
    case Event::Line2: r.value = e.psi2; r.log_value = std::log(e.psi2); break;
  }
  r.diagnostics["T"] = e.T;
  r.diagnostics["psi1"] = e.psi1;
  r.diagnostics["psi2"] = e.psi2;
  if (model2.line1.is_brownian()) r.diagnostics["closed_form_diff"] = e.closed_form_diff;
  return r;
}

ExpansionTerms two_term_or(const TwoLineModel& model2, double x1, double x2, Pieces pieces, const ToleranceConfig& tol) {
  ExpansionTerms e = prepare(model2, x1, x2, Event::Or);
  const AdjustmentData d = adjustment(model2, tol);
  const LineModel& l1 = model2.line1;
  const LineModel& l2 = model2.line2;
  const double v = e.velocity;
  double c_tilde = d.C2;
  e.constant_branch = above(v, -l2.kappa1(-d.gamma2), "C2 tilde");
  if (!e.constant_branch) {
    const double th = l2.inverse_slope(-v);
    const double th1 = conjugate_root(l1, th, tol);
    c_tilde = (laplace_ruin(l2, th) - laplace_ruin(l2, th1)) / c_norm(th, th1, d.gamma2);
    const double th2 = conjugate_root(l2, th, tol);
    e.constants["C2_tilde_alt"] = (laplace_ruin(l2, th) - laplace_ruin(l2, th2)) / c_norm(th, th2, d.gamma2);
  }
  e.constants["C2_tilde"] = c_tilde;
  const Piece p1 = psi_piece(l1, x1, e.T, pieces, tol);
  const Piece s = survival_piece(tilt(l1, -d.gamma2).model, x1, e.T, pieces, tol);
  finish(e, p1, std::log(c_tilde) - d.gamma2 * x2, s);
  return e;
}

ExpansionTerms two_term_sim(const TwoLineModel& model2, double x1, double x2, Pieces pieces, const ToleranceConfig& tol) {
  ExpansionTerms e = prepare(model2, x1, x2, Event::Sim);
  const AdjustmentData d = adjustment(model2, tol);
  const LineModel& l1 = model2.line1;
  const LineModel& l2 = model2.line2;
  const double v = e.velocity;
  double c_tilde = d.C1;
  e.constant_branch = above(v, -l2.kappa1(-d.gamma1), "C1 tilde");
  if (!e.constant_branch) {
    const double th = l2.inverse_slope(-v);
    const double th2 = conjugate_root(l2, th, tol);
    c_tilde = (laplace_ruin(l1, th) - laplace_ruin(l1, th2)) / c_norm(th, th2, d.gamma1);
    if (l1.kappa1(th) < 0) {
      const double th1 = conjugate_root(l1, th, tol);
      e.constants["C1_tilde_alt"] = (laplace_ruin(l1, th) - laplace_ruin(l1, th1)) / c_norm(th, th1, d.gamma1);
    }
  }
  e.constants["C1_tilde"] = c_tilde;
  const Piece p2 = psi_piece(l2, x2, e.T, pieces, tol);
  const Piece s = survival_piece(tilt(l2, -d.gamma1).model, x2, e.T, pieces, tol);
  finish(e, p2, std::log(c_tilde) - d.gamma1 * x1, s);
  return e;
}

ExpansionTerms two_term_and(const TwoLineModel& model2, double x1, double x2, Pieces pieces, const ToleranceConfig& tol) {
  ExpansionTerms e = prepare(model2, x1, x2, Event::And);
  const AdjustmentData d = adjustment(model2, tol);
  const LineModel& l1 = model2.line1;
  const LineModel& l2 = model2.line2;
  const double v = e.velocity;
  const bool large = above(v, -l2.kappa1(-d.gamma3), "C1 bar");
  e.constant_branch = !large;
  double c_bar2 = 0.0;
  double c_bar1 = d.C2_hat;
  if (large) {
    const double th = l2.inverse_slope(-v);
    const double th1 = conjugate_root(l1, th, tol);
    const double th2 = conjugate_root(l2, th, tol);
    c_bar2 = laplace_survival(l2, th2) / std::abs(c_norm(th, th2, d.gamma2));
    c_bar1 = (laplace_ruin(l2, th1) - 1.0 / th) / std::abs(c_norm(th, th1, d.gamma3));
  }
  e.constants["C2_bar"] = c_bar2;
  e.constants["C1_bar"] = c_bar1;
  const Piece w1 = after_piece(l1, x1, e.T, pieces, tol);
  const Piece q1 = psi_piece(tilt(l1, -d.gamma3).model, x1, e.T, pieces, tol);
  const double log_b = std::log(c_bar1) - d.gamma2 * x2 - d.gamma_tilde * x1 + q1.log;
  double log_term2 = log_b;
  if (c_bar2 > 0) {
    const Piece q2 = psi_piece(tilt(l2, -d.gamma2).model, x2, e.T, pieces, tol);
    log_term2 = log_add(std::log(c_bar2) - d.gamma2 * x2 + q2.log, log_b);
  }
  finish(e, w1, 0.0, Piece{0.0, log_term2, 0.0});
  return e;
}

SharpConstants sharp_constants(const TwoLineModel& model2, int i, double w, const ToleranceConfig& tol) {
  require_exact_driver(model2);
  if (i != 1 && i != 2) fail(ErrorKind::OutOfRange, "line index must be 1 or 2");
  const LineModel& li = model2.line(i);
  const LineModel& lo = model2.line(3 - i);
  SharpConstants s;
  s.w = w;
  s.theta_w = model2.line2.inverse_slope(-w);
  s.theta_conj = conjugate_root(li, s.theta_w, tol);
  const double th = s.theta_w;
  const double tc = s.theta_conj;
  if (th == 0.0 || tc == 0.0) fail(ErrorKind::BoundaryVelocity, "D constants are singular at this velocity");
  const double k0 = lo.drift();
  s.prime_bracket = (tc - th) / std::abs(th * tc);
  s.sharp_bracket = 1.0 / th - 1.0 / tc + k0 / lo.kappa(tc) - k0 / lo.kappa(th);
  s.scale = std::sqrt(w / (2.0 * std::numbers::pi * lo.kappa2(th)));
  return s;
}

RuinEstimate leading(const TwoLineModel& model2, double x1, double x2, Event event, const ToleranceConfig& tol) {
  require_exact_driver(model2);
  if (!(x1 > 0) || !(x2 > 0) || !std::isfinite(x1) || !std::isfinite(x2)) {
    fail(ErrorKind::OutOfRange, "leading asymptotics need positive reserves");
  }
  const AdjustmentData d = adjustment(model2, tol);
  RuinEstimate r;
  r.method = Method::Leading;
  const double a = x1 / x2;
  r.diagnostics["a"] = a;
  const double log_c1 = std::log(d.C1) - d.gamma1 * x1;
  const double log_c2 = std::log(d.C2) - d.gamma2 * x2;
  if (event == Event::Line1 || event == Event::Line2) {
    r.log_value = event == Event::Line1 ? log_c1 : log_c2;
  } else if (event == Event::Or) {
    if (!(x2 > x1)) {
      r.cone = ConeLabel::LowerCone;
      r.log_value = log_c2;
    } else {
      r.cone = classify(model2, x1, x2, PartitionKind::Sim);
      r.log_value = log_add(log_c1, log_c2);
    }
  } else {
    const bool sim = event == Event::Sim;
    const ConeLabel cone = classify(model2, x1, x2, sim ? PartitionKind::Sim : PartitionKind::And);
    r.cone = cone;
    if (cone == ConeLabel::BoundaryRay) {
      std::ostringstream os;
      os << "a = " << a << " lies on a cone boundary";
      fail(ErrorKind::BoundaryRay, os.str());
    }
    if (!(a < model2.a_bar)) fail(ErrorKind::OutOfRange, "ray beyond a_bar");
    switch (cone) {
      case ConeLabel::LowerCone:
      case ConeLabel::D1: r.log_value = log_c1; break;
      case ConeLabel::D2: r.log_value = log_c2; break;
      case ConeLabel::D2_hat: r.log_value = std::log(d.C2_hat) - d.gamma3 * x1 - d.gamma2 * (x2 - x1); break;
      default: {
        const double w = (model2.p1 - model2.p2) / (1.0 - a);
        const SharpConstants s = sharp_constants(model2, sim ? 2 : 1, w, tol);
        const double D = sim ? s.d_sharp() + s.d_prime() : s.d_prime() - s.d_sharp();
        r.diagnostics["D_prime"] = s.d_prime();
        r.diagnostics["D_sharp"] = s.d_sharp();
        r.diagnostics["gamma_a"] = gamma_ray(model2, a);
        if (!(D > 0)) fail(ErrorKind::BoundaryRay, "leading constant is not positive on this ray");
        r.log_value = std::log(D) - 0.5 * std::log(x2) - r.diagnostics["gamma_a"] * x2;
      }
    }
  }
  r.value = std::exp(r.log_value);
  return r;
}

double RenewalExponents::envelope(double K, double C1, double C2) const {
  return C2 * std::exp(-gamma2 * K) + C1 * std::exp(-gamma1 * a * K);
}

RenewalExponents renewal_exponents(const Renewal& driver, double p1, double p2, double a, const ToleranceConfig& tol) {
  if (!(p1 > p2)) fail(ErrorKind::InvalidModel, "need p1 > p2");
  if (!(a > 0) || !(a < 1)) fail(ErrorKind::OutOfRange, "ray slope must lie in (0, 1)");
  RenewalExponents r;
  r.gamma1 = renewal_adjustment(driver, p1, tol);
  r.gamma2 = renewal_adjustment(driver, p2, tol);
  r.a = a;
  r.rate = std::min(r.gamma2, a * r.gamma1);
  r.equal_order = std::abs(a * r.gamma1 - r.gamma2) <= 1e-9 * r.gamma2;
  return r;
}

}  // namespace ruin
