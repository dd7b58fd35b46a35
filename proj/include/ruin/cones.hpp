#pragma once

#include <string_view>

#include "ruin/models.hpp"

namespace ruin {

enum class ConeLabel { D1, D0, D2, D0_hat, D2_hat, BoundaryRay, LowerCone };
enum class PartitionKind { Sim, And };

std::string_view to_string(ConeLabel label);

struct ConePartition {
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
  bool d2_empty = true;
};

/// Time at which the reserve lines x_i + p_i t meet; 0 when they never do.
double crossing_time(double x1, double x2, double p1, double p2);

ConePartition partition(const TwoLineModel& model2, const ToleranceConfig& tol = {});

/// Cone of the ray through (x1, x2). Throws CrossCheckFailed if the slope test
/// and the crossing-time test disagree.
ConeLabel classify(const TwoLineModel& model2, double x1, double x2, PartitionKind kind);
ConeLabel classify(const TwoLineModel& model2, const ConePartition& part, double x1, double x2, PartitionKind kind);

/// kappa_2*(-v_a)/v_a with v_a = (p1 - p2)/(1 - a).
double gamma_ray(const TwoLineModel& model2, double a);

/// Value of the rate function on the diagonal a = 1 under the two readings
/// of the lower domain endpoint; they coincide for the degenerate model.
struct DiagonalRate {
  double support_value;  // -inf of theta1 + theta2 over the Cramer set
  double domain_value;   // -theta_lower of the driver cumulant
};

DiagonalRate diagonal_rate(const TwoLineModel& model2);

/// Rate function at (x1, x2) with both coordinates negative; +inf when x1 < x2.
double rate_function(const TwoLineModel& model2, double x1, double x2);

/// Infimum of the rate function over (-inf, -a) x (-inf, -1).
double exit_rate(const TwoLineModel& model2, double a);

}  // namespace ruin
