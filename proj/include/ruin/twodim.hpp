#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "ruin/cones.hpp"
#include "ruin/models.hpp"
#include "ruin/numerics.hpp"

namespace ruin {

enum class Event { Or, Sim, And, Line1, Line2 };
enum class Method { Exact, TwoTerm, Leading, MC };

std::string_view to_string(Event e);
std::string_view to_string(Method m);
Event parse_event(std::string_view s);
Method parse_method(std::string_view s);

struct RuinQuery {
  Event event = Event::Or;
  double x1 = 0.0;
  double x2 = 0.0;
  Method method = Method::Exact;

  void validate() const;
};

struct RuinEstimate {
  double value = 0.0;
  double log_value = 0.0;  // stays finite when value underflows
  Method method = Method::Exact;
  std::optional<ConeLabel> cone;
  double quad_err = 0.0;
  std::map<std::string, double> diagnostics;
};

/// All exact two-dimensional quantities at one reserve pair.
struct ExactValues {
  double T = 0.0;
  double psi1 = 0.0;  // psi_1(x1)
  double psi2 = 0.0;  // psi_2(x2)
  double or_value = 0.0;
  double sim_value = 0.0;
  double and_value = 0.0;
  double log_or = 0.0;
  double log_sim = 0.0;
  double log_and = 0.0;
  double quad_err = 0.0;
  // Largest difference from the closed forms (Brownian only, else 0).
  double closed_form_diff = 0.0;
};

/// psi_or, psi_sim and psi_and assembled from one-dimensional finite-time
/// ruin probabilities of the base and tilted lines. For the Brownian driver
/// the result is also checked against the closed normal-cdf forms (1e-8).
ExactValues exact_all(const TwoLineModel& model2, double x1, double x2, const ToleranceConfig& tol = {});

RuinEstimate exact(const TwoLineModel& model2, const RuinQuery& query, const ToleranceConfig& tol = {});

struct BrownianClosedForm {
  double or_value;
  double sim_value;
  double and_value;
};

/// Closed forms in a(x, p) = (x + pT)/sqrt(T), for x2 > x1.
BrownianClosedForm brownian_closed_form(double p1, double p2, double x1, double x2);

/// How the one-dimensional finite-time factors inside a two-term expansion
/// are evaluated: by their saddlepoint asymptotics or exactly.
enum class Pieces { Asymptotic, Exact };

struct ExpansionTerms {
  Event event = Event::Or;
  double term1 = 0.0;
  double term2 = 0.0;
  double log_term1 = 0.0;
  double log_term2 = 0.0;
  std::map<std::string, double> constants;
  ConeLabel cone = ConeLabel::D0;
  double velocity = 0.0;  // v = x2 / T
  double T = 0.0;
  bool constant_branch = true;  // true when the Cramer constant is used unchanged

  double total() const { return term1 + term2; }
  double log_total() const;
};

ExpansionTerms two_term_or(const TwoLineModel& model2, double x1, double x2, Pieces pieces = Pieces::Asymptotic,
                           const ToleranceConfig& tol = {});
ExpansionTerms two_term_sim(const TwoLineModel& model2, double x1, double x2, Pieces pieces = Pieces::Asymptotic,
                            const ToleranceConfig& tol = {});
ExpansionTerms two_term_and(const TwoLineModel& model2, double x1, double x2, Pieces pieces = Pieces::Asymptotic,
                            const ToleranceConfig& tol = {});

/// The bracketed factors of D'_i(w) and D#_i(w) and the shared scale
/// sqrt(w / (2 pi kappa''(theta_w))).
struct SharpConstants {
  double w = 0.0;
  double theta_w = 0.0;
  double theta_conj = 0.0;  // conjugate of theta_w under kappa_i
  double prime_bracket = 0.0;
  double sharp_bracket = 0.0;
  double scale = 0.0;

  double d_prime() const { return prime_bracket * scale; }
  double d_sharp() const { return sharp_bracket * scale; }
};

SharpConstants sharp_constants(const TwoLineModel& model2, int i, double w, const ToleranceConfig& tol = {});

/// Leading-order asymptotics of psi_sim, psi_and or psi_or at (x1, x2).
RuinEstimate leading(const TwoLineModel& model2, double x1, double x2, Event event, const ToleranceConfig& tol = {});

struct RenewalExponents {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double a = 0.0;
  double rate = 0.0;  // min(gamma2, a gamma1), the decay rate of psi_or(aK, K) in K
  bool equal_order = false;

  /// C2 e^{-gamma2 K} + C1 e^{-gamma1 a K} for caller-supplied constants.
  double envelope(double K, double C1, double C2) const;
};

RenewalExponents renewal_exponents(const Renewal& driver, double p1, double p2, double a, const ToleranceConfig& tol = {});

}  // namespace ruin
