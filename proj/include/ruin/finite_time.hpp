#pragma once

#include <string_view>

#include "ruin/models.hpp"
#include "ruin/numerics.hpp"

namespace ruin {

enum class FiniteMethod { ExactCpe, ExactBrownian, AhAsymptotic };

std::string_view to_string(FiniteMethod m);

struct FiniteRuinResult {
  double value = 0.0;  // psi(x, t), clamped to [0, 1]
  FiniteMethod method = FiniteMethod::ExactCpe;
  double quad_err = 0.0;
  // The three pieces are each evaluated in their best-conditioned form, so
  // survival is not computed as 1 - value (and likewise for after).
  double survival = 1.0;  // P(tau > t)
  double after = 0.0;     // P(t < tau < inf)
  double raw = 0.0;       // value before clamping
  // Natural logs of value and after; these stay finite long after the
  // probabilities themselves underflow.
  double log_value = 0.0;
  double log_after = 0.0;
};

/// psi(x); 1 when the drift is not positive.
double ultimate_ruin(const LineModel& model, double x);

FiniteRuinResult finite_ruin(const LineModel& model, double x, double t, const ToleranceConfig& tol = {});
FiniteRuinResult finite_ruin(const TiltedModel& model, double x, double t, const ToleranceConfig& tol = {});

double ruin_after(const LineModel& model, double x, double t, const ToleranceConfig& tol = {});

/// w(x,t) of the exponential-claims formula by direct quadrature of the real
/// integral over (s-, s+). Fine for moderate x and t; the oscillating
/// integrand cancels catastrophically once x and t grow, which is why
/// finite_ruin uses cpe_contour instead.
QuadratureResult cpe_w_direct(double lambda, double mu, double p, double x, double t, const ToleranceConfig& tol = {});

/// The same integral moved onto the steepest-descent circle of z = e^{i phi}.
/// w = D + captured * (C e^{-gamma x} if gamma > 0 else 1).
struct CpeContour {
  double log_abs_d = 0.0;
  int sign_d = 0;
  double err = 0.0;  // absolute error of D
  bool captured = false;
  double radius = 0.0;
  double pole = 0.0;

  double d() const;
};

CpeContour cpe_contour(double lambda, double mu, double p, double x, double t, const ToleranceConfig& tol = {});

enum class Regime {
  BelowCritical,  // x/t under the critical velocity: psi follows the Cramer branch
  AboveCritical,
};

struct AhBranches {
  double v = 0.0;
  double zeta = 0.0;
  double C = 1.0;
  double critical_velocity = 0.0;
  Regime regime = Regime::BelowCritical;
  double D = 0.0;              // signed D(v)
  double cramer_branch = 0.0;  // C e^{-zeta x}
  double saddle_branch = 0.0;  // |D(v)| t^{-1/2} e^{-t kappa*(-v)}
  double log_cramer = 0.0;
  double log_saddle = 0.0;
  SaddleData saddle{};

  double psi() const { return regime == Regime::BelowCritical ? cramer_branch : saddle_branch; }
  double after() const { return regime == Regime::BelowCritical ? saddle_branch : cramer_branch; }
  double log_psi() const { return regime == Regime::BelowCritical ? log_cramer : log_saddle; }
  double log_after() const { return regime == Regime::BelowCritical ? log_saddle : log_cramer; }
};

AhBranches ah_branches(const LineModel& model, double x, double t, const ToleranceConfig& tol = {});

/// value = psi branch, after = w branch of the same asymptotic.
FiniteRuinResult ah_asymptotic(const LineModel& model, double x, double t, const ToleranceConfig& tol = {});

enum class LawSide { ConditionedOnSurvival, ConditionedOnRuin };

std::string_view to_string(LawSide s);

/// Limiting law of X(t) given tau > t (survival) or tau < t (ruin) along x = v t.
struct LimitLaw {
  LawSide side;
  double v;
  double theta_v;
  double theta_v_conj;
  double c_v;

  double density(double y) const;
  double cdf(double y) const;
};

LimitLaw limit_law(const LineModel& model, double v, LawSide side, const ToleranceConfig& tol = {});

/// Laplace transform of psi(x) in x: 1/theta - kappa'(0)/kappa(theta).
double laplace_ruin(const LineModel& model, double theta);
/// Laplace transform of 1 - psi(x): kappa'(0)/kappa(theta).
double laplace_survival(const LineModel& model, double theta);

}  // namespace ruin
