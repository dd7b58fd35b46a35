#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>

#include "ruin/numerics.hpp"
#include "ruin/philox.hpp"

namespace ruin {

/// A nonnegative distribution with a known moment generating function,
/// used for the renewal driver (interarrival times and claim sizes).
class Distribution {
 public:
  enum class Kind { Exponential, Deterministic, Gamma, Custom };

  static Distribution exponential(double rate);
  static Distribution deterministic(double value);
  static Distribution gamma(double shape, double rate);
  /// mgf must be finite on (-inf, mgf_sup). A custom law cannot be tilted.
  static Distribution custom(std::string name, std::function<double(double)> mgf, double mgf_sup, double mean,
                             std::function<double(Substream&)> sampler);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double mgf(double s) const;
  /// Supremum of the interval on which the mgf is finite (+inf for bounded laws).
  double mgf_sup() const { return mgf_sup_; }
  double mean() const;
  double sample(Substream& rng) const;
  /// Exponentially tilted law with density proportional to e^{s y} f(y).
  Distribution tilted(double s) const;
  std::string describe() const;

 private:
  Distribution() = default;

  Kind kind_ = Kind::Deterministic;
  std::string name_;
  double a_ = 0.0;  // rate, value, or shape
  double b_ = 0.0;  // rate for gamma
  double mgf_sup_ = 0.0;
  double mean_ = 0.0;
  std::function<double(double)> custom_mgf_;
  std::function<double(Substream&)> custom_sampler_;
};

struct CompoundPoissonExp {
  double lambda = 1.0;
  double mu = 1.0;
};

struct StandardBrownian {};

struct Renewal {
  Distribution interarrival;
  Distribution claim;
};

using ClaimDriver = std::variant<CompoundPoissonExp, StandardBrownian, Renewal>;

std::string driver_name(const ClaimDriver& driver);
void validate_driver(const ClaimDriver& driver);

/// Net process Z(t) = p t - S(t) of one coordinate. For the Brownian driver p
/// is the drift and may have either sign (tilted models need that).
class LineModel {
 public:
  LineModel(ClaimDriver driver, double p);

  const ClaimDriver& driver() const { return driver_; }
  double premium() const { return p_; }
  bool is_cpe() const { return std::holds_alternative<CompoundPoissonExp>(driver_); }
  bool is_brownian() const { return std::holds_alternative<StandardBrownian>(driver_); }
  bool is_renewal() const { return std::holds_alternative<Renewal>(driver_); }

  double kappa(double theta) const;
  double kappa1(double theta) const;
  double kappa2(double theta) const;
  double theta_lower() const;
  double v_lower() const;
  /// Mean drift kappa'(0).
  double drift() const { return kappa1(0.0); }
  bool in_domain(double theta) const { return theta > theta_lower(); }
  /// The unique theta with kappa'(theta) = slope (needs slope > v_lower).
  double inverse_slope(double slope) const;
  /// Argmin of kappa over its domain.
  double kappa_argmin() const { return inverse_slope(0.0); }

 private:
  void require_cumulant() const;

  ClaimDriver driver_;
  double p_;
};

struct TwoLineModel {
  ClaimDriver driver;
  double p1;
  double p2;
  LineModel line1;
  LineModel line2;
  double a_bar;

  const LineModel& line(int i) const { return i == 1 ? line1 : line2; }
};

TwoLineModel make_two_line(const ClaimDriver& driver, double p1, double p2);

struct TiltedModel {
  LineModel base;
  double shift;
  LineModel model;
};

struct AdjustmentData {
  double gamma1, gamma2, gamma3, gamma_tilde;
  double zeta1, zeta2;
  double C1, C2, C2_hat;
};

struct SaddleData {
  double v;
  double theta_v;
  double theta_v_conj;
  double kstar;
  double kpp;
};

struct CanonicalCoordinates {
  double x1, x2, p1, p2;
};

CanonicalCoordinates scale_to_canonical(double u1, double u2, double c1, double c2, double delta1, double delta2);

double cumulant(const LineModel& model, double theta);

/// Adjustment coefficient gamma > 0 with kappa(-gamma) = 0 (closed form, cross-checked).
double adjustment_coefficient(const LineModel& model, const ToleranceConfig& tol = {});
/// Cramer constant C with psi(x) = C e^{-gamma x}.
double cramer_constant(const LineModel& model);

AdjustmentData adjustment(const TwoLineModel& model2, const ToleranceConfig& tol = {});

TiltedModel tilt(const LineModel& model, double c);

/// Second root of kappa(theta) = kappa(theta0) on the other side of the minimum.
double conjugate_root(const LineModel& model, double theta0, const ToleranceConfig& tol = {});

SaddleData saddle(const LineModel& model, double v, const ToleranceConfig& tol = {});

double joint_cumulant(const TwoLineModel& model2, double theta1, double theta2);

/// Positive root of E[e^{-gamma p zeta}] E[e^{gamma sigma}] = 1.
double renewal_adjustment(const Renewal& driver, double p, const ToleranceConfig& tol = {});

}  // namespace ruin
