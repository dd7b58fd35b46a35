#include "ruin/cones.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ruin/errors.hpp"

namespace ruin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool on_ray(double a, double s) { return std::abs(a - s) < 1e-9 * std::max(1.0, s); }

void agree(double derived, double closed, const char* what) {
  if (std::abs(derived - closed) > 1e-10 * std::max(1.0, std::abs(closed))) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": derivative ratio " << derived << " vs closed form " << closed;
    fail(ErrorKind::CrossCheckFailed, os.str());
  }
}

}  // namespace

std::string_view to_string(ConeLabel label) {
  switch (label) {
    case ConeLabel::D1: return "D1";
    case ConeLabel::D0: return "D0";
    case ConeLabel::D2: return "D2";
    case ConeLabel::D0_hat: return "D0_hat";
    case ConeLabel::D2_hat: return "D2_hat";
    case ConeLabel::BoundaryRay: return "BoundaryRay";
    case ConeLabel::LowerCone: return "LowerCone";
  }
  return "?";
}

double crossing_time(double x1, double x2, double p1, double p2) {
  if (!(p1 > p2)) fail(ErrorKind::InvalidModel, "crossing time needs p1 > p2");
  return x2 > x1 ? (x2 - x1) / (p1 - p2) : 0.0;
}

ConePartition partition(const TwoLineModel& model2, const ToleranceConfig& tol) {
  const AdjustmentData d = adjustment(model2, tol);
  const LineModel& l1 = model2.line1;
  const LineModel& l2 = model2.line2;
  ConePartition part;
  part.s1 = l1.kappa1(-d.gamma1) / l2.kappa1(-d.gamma1);
  const double k12 = l1.kappa1(-d.gamma2);
  part.d2_empty = k12 > 0;
  part.s2 = std::max(0.0, k12 / l2.kappa1(-d.gamma2));
  part.s3 = d.gamma3 > d.gamma2 ? l1.kappa1(-d.gamma3) / l2.kappa1(-d.gamma3) : part.s2;

  const double p1 = model2.p1;
  const double p2 = model2.p2;
  double c1, c2, c3;
  if (const auto* c = std::get_if<CompoundPoissonExp>(&model2.driver)) {
    const double rho = c->lambda / c->mu;
    c1 = (p1 * p1 / rho - p1) / (p1 * p1 / rho - p2);
    c2 = std::max(0.0, p2 * p2 / rho - p1) / (p2 * p2 / rho - p2);
    c3 = part.d2_empty ? (rho * p1 * p1 / (p2 * p2) - p1) / (rho * p1 * p1 / (p2 * p2) - p2) : c2;
  } else {
    c1 = p1 / (2 * p1 - p2);
    c2 = std::max(0.0, 2 * p2 - p1) / p2;
    c3 = part.d2_empty ? (p1 - 2 * p2) / (2 * p1 - 3 * p2) : c2;
  }
  agree(part.s1, c1, "s1");
  agree(part.s2, c2, "s2");
  agree(part.s3, c3, "s3");
  return part;
}

ConeLabel classify(const TwoLineModel& model2, double x1, double x2, PartitionKind kind) {
  return classify(model2, partition(model2), x1, x2, kind);
}

ConeLabel classify(const TwoLineModel& model2, const ConePartition& part, double x1, double x2, PartitionKind kind) {
  if (!(x1 >= 0) || !(x2 >= 0)) fail(ErrorKind::OutOfRange, "reserves must be nonnegative");
  if (x2 <= x1) return ConeLabel::LowerCone;
  const double a = x1 / x2;
  const bool sim = kind == PartitionKind::Sim;
  const double lower = sim ? part.s2 : part.s3;
  if (on_ray(a, part.s1)) return ConeLabel::BoundaryRay;
  if (lower > 0 && on_ray(a, lower)) return ConeLabel::BoundaryRay;
  if (lower == 0 && !part.d2_empty && on_ray(a, 0.0)) return ConeLabel::BoundaryRay;

  ConeLabel label;
  if (a > part.s1) {
    label = ConeLabel::D1;
  } else if (a > lower) {
    label = sim ? ConeLabel::D0 : ConeLabel::D0_hat;
  } else {
    label = sim ? ConeLabel::D2 : ConeLabel::D2_hat;
  }

  // The same cones through the times at which each line would be ruined on
  // its most likely path.
  const AdjustmentData d = adjustment(model2);
  const double T = crossing_time(x1, x2, model2.p1, model2.p2);
  const double T1 = x1 / -model2.line1.kappa1(-d.gamma1);
  const double T2 = x2 / -model2.line2.kappa1(sim ? -d.gamma2 : -d.gamma3);
  const bool in_d1 = T < T1;
  const bool in_d2 = T2 < T;
  const bool near = std::abs(T - T1) <= 1e-8 * std::max(T, T1) || std::abs(T - T2) <= 1e-8 * std::max(T, T2);
  if (!near) {
    const bool ok = (label == ConeLabel::D1) == in_d1 &&
                    (label == ConeLabel::D2 || label == ConeLabel::D2_hat) == (in_d2 && !in_d1);
    if (!ok) fail(ErrorKind::CrossCheckFailed, "slope and crossing-time classifications disagree");
  }
  return label;
}

double gamma_ray(const TwoLineModel& model2, double a) {
  if (!(a > 0) || !(a < model2.a_bar) || a == 1.0) fail(ErrorKind::OutOfRange, "ray slope must lie in (0, a_bar)");
  const double v = (model2.p1 - model2.p2) / (1.0 - a);
  return saddle(model2.line2, v).kstar / v;
}

DiagonalRate diagonal_rate(const TwoLineModel& model2) {
  // On the boundary of the Cramer set, theta2 = kappa1(s)/(p1 - p2) and
  // theta1 = s - theta2, so theta1 + theta2 = s runs over the driver domain
  // and its infimum is the lower endpoint, approached but never attained.
  const double lower = model2.line1.theta_lower();
  return {-lower, -model2.line2.theta_lower()};
}

double rate_function(const TwoLineModel& model2, double x1, double x2) {
  if (!(x1 < 0) || !(x2 < 0)) fail(ErrorKind::OutOfRange, "rate function needs negative coordinates");
  const double a = x1 / x2;
  if (std::abs(a - 1.0) <= 1e-12) return std::abs(x2) * diagonal_rate(model2).support_value;
  // theta2 is unbounded above on the Cramer set, which the support function
  // sees as soon as x2 > x1.
  if (a > 1.0) return kInf;
  return std::abs(x2) * gamma_ray(model2, a);
}

double exit_rate(const TwoLineModel& model2, double a) {
  if (!(a > 0)) fail(ErrorKind::OutOfRange, "exit rate needs a > 0");
  const ConePartition part = partition(model2);
  const AdjustmentData d = adjustment(model2);
  if (a <= part.s2) return d.gamma2;
  if (a >= part.s1) return a * d.gamma1;
  return gamma_ray(model2, a);
}

}  // namespace ruin
