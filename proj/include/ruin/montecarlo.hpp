#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ruin/finite_time.hpp"
#include "ruin/models.hpp"
#include "ruin/twodim.hpp"

namespace ruin {

struct FixedTime {
  double t;
};

/// Stop a line as "never ruined" once its reserve exceeds x_i + L. L <= 0
/// picks the default 30 / min(gamma_i).
struct SafeLevel {
  double L = 0.0;
};

using Horizon = std::variant<FixedTime, SafeLevel>;

struct SimConfig {
  std::uint64_t n = 100000;
  std::uint64_t seed = 20240611;
  Horizon horizon = SafeLevel{};
  /// Exponential tilt c of the Levy driver (the measure of the Z_2 martingale).
  std::optional<double> tilt;
  /// Renewal driver only: equal mixture of the two lines' Lundberg tilts,
  /// under which OR-ruin is certain. Valid for Event::Or.
  bool lundberg_mixture = false;
  double ci_level = 0.95;
  /// Worker threads; 0 uses the hardware concurrency. Results do not depend on it.
  unsigned workers = 0;

  void validate() const;
};

enum class Censor { None, FixedTime, SafeLevel, Cap };

std::string_view to_string(Censor c);

/// One replication. Times are +inf when the event was not observed.
struct PathRecord {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double tau_or = 0.0;
  double tau_sim = 0.0;
  double tau_and = 0.0;
  /// First time S(t) exceeds min(x1 + p1 t, x2 + p2 t), kept separately as a
  /// bookkeeping cross-check of tau_or.
  double tau_or_barrier = 0.0;
  Censor censor = Censor::None;
  double t_stop = 0.0;
  double likelihood_weight = 1.0;  // dP/dQ at t_stop
  // dP/dQ at each event time, 1 without a change of measure.
  double w1 = 1.0;
  double w2 = 1.0;
  double w_or = 1.0;
  double w_sim = 1.0;
  double w_and = 1.0;
};

struct McEstimate {
  double p_hat = 0.0;
  double std_err = 0.0;
  Interval ci{0.0, 0.0};
  std::uint64_t n = 0;
  double bias_bound = 0.0;
  bool bias_known = true;  // false for a fixed-time cut of an ultimate event
  std::uint64_t hits = 0;  // replications with a nonzero contribution

  /// |value - p_hat| <= k std_err
  bool agrees(double value, double k = 3.0) const;
};

/// Path records of replications [first, first + count), in order.
std::vector<PathRecord> simulate(const TwoLineModel& model2, double x1, double x2, const SimConfig& config,
                                 std::uint64_t first = 0, std::uint64_t count = 0);

/// All five events from one set of replications.
std::map<Event, McEstimate> estimate_all(const TwoLineModel& model2, double x1, double x2, const SimConfig& config);

McEstimate estimate(const TwoLineModel& model2, double x1, double x2, Event event, const SimConfig& config);

/// One line: FixedTime estimates psi(x, t), SafeLevel estimates psi(x).
McEstimate estimate_line(const LineModel& model, double x, const SimConfig& config);

struct LimitReport {
  std::string what;
  double statistic = 0.0;  // mean of tau/x, or the KS distance
  double expected = 0.0;   // LLN target (0 for KS)
  double threshold = 0.0;
  bool passed = false;
  std::uint64_t paths = 0;
  std::uint64_t conditioned = 0;
  double effective_size = 0.0;
};

/// Mean of tau(x)/x against -1/kappa'(0) (within 10%) for a line with negative drift.
LimitReport check_lln(const LineModel& model, double x, const SimConfig& config);

/// KS distance between the (importance-weighted) law of X(t) given the side's
/// conditioning event and the limit law, at x = v t. Sampling is tilted by theta_v.
LimitReport check_limit_law(const LineModel& model, double v, LawSide side, double t, const SimConfig& config);

}  // namespace ruin
