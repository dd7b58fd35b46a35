#include "ruin/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "ruin/errors.hpp"
#include "ruin/philox.hpp"

namespace ruin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kBlock = 4096;
// Paths still unresolved at this time are cut (only reachable with a drift of zero).
constexpr double kTimeCap = 1e7;

// Replications are cut into fixed blocks; a block's result depends only on
// its index, and results are combined in block order afterwards, so the
// worker count cannot change a single bit of the output.
template <class Result, class Fn>
std::vector<Result> run_blocks(std::uint64_t n, unsigned workers, Fn&& fn) {
  const std::uint64_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<Result> out(nblocks);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(nblocks, 1)));
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto work = [&] {
    for (;;) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= nblocks) return;
      try {
        const std::uint64_t first = b * kBlock;
        out[b] = fn(first, std::min(kBlock, n - first));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = nblocks;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Everything a replication needs, resolved once per estimate.
struct Engine {
  int lines = 2;
  double x[2] = {0, 0};
  double p[2] = {0, 0};
  double T = 0.0;          // kink of the barrier, 0 if none
  double t_max = kInf;     // fixed horizon
  double safe = kInf;      // safe level above the starting reserve
  bool or_only = false;    // stop at the first ruin
  bool to_horizon = false; // keep going after ruin until t_max

  enum class Kind { Poisson, Renewal, Brownian } kind = Kind::Poisson;
  double lambda = 1.0;
  double mu = 1.0;
  std::vector<Distribution> inter;  // one entry, or two mixture components
  std::vector<Distribution> claim;
  double shift = 0.0;  // Brownian drift added by the tilt
  double h0 = 1.0 / 64;
  double h1 = 1.0 / 64;

  // Likelihood ratio dP/dQ at time t: exponential tilt c of line `ref`,
  // or the Lundberg mixture.
  double c = 0.0;
  double kappa_c = 0.0;
  int ref = 1;
  bool mixture = false;
  double mix_gamma[2] = {0, 0};

  double log_weight(double t, double S) const {
    if (mixture) {
      return -(std::log(0.5) + log_sum_exp(mix_gamma[0] * (S - p[0] * t), mix_gamma[1] * (S - p[1] * t)));
    }
    if (c == 0.0) return 0.0;
    return -c * (p[ref] * t - S) + kappa_c * t;
  }
};

struct LineState {
  bool ruined = false;
  bool safe = false;
  double tau = kInf;
  double w = 0.0;
  bool resolved() const { return ruined || safe; }
};

void finish_record(PathRecord& r, const LineState* st, int lines) {
  r.tau1 = st[0].tau;
  r.w1 = st[0].w;
  if (lines == 2) {
    r.tau2 = st[1].tau;
    r.w2 = st[1].w;
  } else {
    r.tau2 = kInf;
    r.w2 = 0.0;
  }
  r.tau_or = std::min(r.tau1, r.tau2);
  r.w_or = r.tau1 <= r.tau2 ? r.w1 : r.w2;
  if (lines == 2) {
    r.tau_and = std::max(r.tau1, r.tau2);
    r.w_and = r.tau1 >= r.tau2 ? r.w1 : r.w2;
  } else {
    r.tau_and = r.tau1;
    r.w_and = r.w1;
    r.tau_sim = r.tau1;
    r.w_sim = r.w1;
  }
  if (!std::isfinite(r.tau_or)) r.w_or = 0.0;
  if (!std::isfinite(r.tau_and)) r.w_and = 0.0;
  if (!std::isfinite(r.tau_sim)) r.w_sim = 0.0;
}

// Path of a jump driver, claim epoch by claim epoch. Between claims every
// reserve increases, so ruin and simultaneous negativity can only start at
// a claim.
PathRecord jump_path(const Engine& e, Substream& rng, double* x_end = nullptr) {
  PathRecord r;
  LineState st[2];
  r.tau_sim = kInf;
  r.w_sim = 0.0;
  r.tau_or_barrier = kInf;
  bool sim_done = e.lines == 1;
  bool high[2] = {false, false};  // reached the safe level, ruined or not
  int comp = 0;
  if (e.mixture) comp = rng.uniform() < 0.5 ? 0 : 1;
  double t = 0.0;
  double S = 0.0;
  for (;;) {
    const double dt = e.kind == Engine::Kind::Poisson ? rng.exponential() / e.lambda : e.inter[comp].sample(rng);
    if (t + dt > e.t_max) {
      r.censor = Censor::FixedTime;
      t = e.t_max;
      break;
    }
    t += dt;
    // The reserve peaks just before the claim.
    for (int i = 0; i < e.lines; ++i) {
      if (e.x[i] + e.p[i] * t - S >= e.x[i] + e.safe) high[i] = true;
    }
    S += e.kind == Engine::Kind::Poisson ? rng.exponential() / e.mu : e.claim[comp].sample(rng);
    bool all_negative = true;
    double lowest = kInf;
    for (int i = 0; i < e.lines; ++i) {
      const double X = e.x[i] + e.p[i] * t - S;
      lowest = std::min(lowest, e.x[i] + e.p[i] * t);
      if (X >= 0) all_negative = false;
      LineState& s = st[i];
      if (s.resolved()) continue;
      if (high[i]) {
        s.safe = true;
      } else if (X < 0) {
        s.ruined = true;
        s.tau = t;
        s.w = std::exp(e.log_weight(t, S));
      }
    }
    if (!std::isfinite(r.tau_or_barrier) && S > lowest) r.tau_or_barrier = t;
    if (!sim_done) {
      if (all_negative) {
        r.tau_sim = t;
        r.w_sim = std::exp(e.log_weight(t, S));
        sim_done = true;
      } else if (high[0] || high[1]) {
        sim_done = true;
      }
    }
    const bool lines_done = st[0].resolved() && (e.lines == 1 || st[1].resolved());
    if (e.or_only && (st[0].ruined || (e.lines == 2 && st[1].ruined))) break;
    if (!e.to_horizon && lines_done && sim_done) break;
    if (t > kTimeCap) {
      r.censor = Censor::Cap;
      break;
    }
  }
  if (r.censor == Censor::None && (st[0].safe || (e.lines == 2 && st[1].safe))) r.censor = Censor::SafeLevel;
  r.t_stop = t;
  r.likelihood_weight = std::exp(e.log_weight(t, S));
  if (x_end) *x_end = e.x[e.ref] + e.p[e.ref] * t - S;
  finish_record(r, st, e.lines);
  return r;
}

// Brownian path on a grid. Given the grid values each line between two grid
// points is a Brownian bridge, whose minimum falls below zero with
// probability exp(-2 a b / h). Within one step the lines keep their order, so
// the upper line can only cross when the lower one does; one uniform decides
// both.
PathRecord brownian_path(const Engine& e, Substream& rng) {
  PathRecord r;
  LineState st[2];
  r.tau_sim = kInf;
  r.w_sim = 0.0;
  bool sim_done = e.lines == 1;
  bool high[2] = {false, false};
  double t = 0.0;
  double W = 0.0;  // driver value: X_i = x_i + p_i t + W
  double prev[2] = {e.x[0], e.x[1]};
  for (;;) {
    double h = t < e.T ? std::min(e.h0, e.T - t) : e.h1;
    if (t + h >= e.t_max) h = e.t_max - t;
    if (!(h > 0)) {
      r.censor = Censor::FixedTime;
      break;
    }
    W += e.shift * h + std::sqrt(h) * rng.normal();
    t = t + h >= e.t_max ? e.t_max : t + h;
    const double u = rng.uniform();
    double q_min = 1.0;
    for (int i = 0; i < e.lines; ++i) {
      const double X = e.x[i] + e.p[i] * t + W;
      const double q = (prev[i] <= 0 || X <= 0) ? 1.0 : std::exp(-2.0 * prev[i] * X / h);
      q_min = std::min(q_min, q);
      prev[i] = X;
      LineState& s = st[i];
      if (!s.resolved() && u < q) {
        s.ruined = true;
        s.tau = t;
        s.w = std::exp(e.log_weight(t, -W));
      }
      if (X >= e.x[i] + e.safe) {
        high[i] = true;
        if (!s.resolved()) s.safe = true;
      }
    }
    if (!sim_done) {
      if (u < q_min) {
        r.tau_sim = t;
        r.w_sim = std::exp(e.log_weight(t, -W));
        sim_done = true;
      } else if (high[0] || high[1]) {
        sim_done = true;
      }
    }
    const bool lines_done = st[0].resolved() && (e.lines == 1 || st[1].resolved());
    if (e.or_only && (st[0].ruined || (e.lines == 2 && st[1].ruined))) break;
    if (lines_done && sim_done) break;
    if (t >= e.t_max) {
      r.censor = Censor::FixedTime;
      break;
    }
    if (t > kTimeCap) {
      r.censor = Censor::Cap;
      break;
    }
  }
  if (r.censor == Censor::None && (st[0].safe || (e.lines == 2 && st[1].safe))) r.censor = Censor::SafeLevel;
  r.t_stop = t;
  r.likelihood_weight = std::exp(e.log_weight(t, -W));
  finish_record(r, st, e.lines);
  r.tau_or_barrier = r.tau_or;
  return r;
}

PathRecord run_path(const Engine& e, std::uint64_t seed, std::uint64_t index) {
  Substream rng(seed, index);
  return e.kind == Engine::Kind::Brownian ? brownian_path(e, rng) : jump_path(e, rng);
}

// Sets the driver law (tilted if asked) and the likelihood bookkeeping.
void set_driver(Engine& e, const LineModel& ref_line, const SimConfig& cfg) {
  const ClaimDriver& d = ref_line.driver();
  if (const auto* cp = std::get_if<CompoundPoissonExp>(&d)) {
    e.kind = Engine::Kind::Poisson;
    e.lambda = cp->lambda;
    e.mu = cp->mu;
  } else if (std::holds_alternative<StandardBrownian>(d)) {
    e.kind = Engine::Kind::Brownian;
  } else {
    const auto& rn = std::get<Renewal>(d);
    e.kind = Engine::Kind::Renewal;
    e.inter = {rn.interarrival};
    e.claim = {rn.claim};
  }
  if (cfg.tilt && *cfg.tilt != 0.0) {
    if (e.kind == Engine::Kind::Renewal) {
      fail(ErrorKind::UnsupportedDriver, "the renewal driver has no Levy tilt; use lundberg_mixture");
    }
    const TiltedModel tm = tilt(ref_line, *cfg.tilt);
    e.c = *cfg.tilt;
    e.kappa_c = ref_line.kappa(e.c);
    if (e.kind == Engine::Kind::Poisson) {
      const auto& q = std::get<CompoundPoissonExp>(tm.model.driver());
      e.lambda = q.lambda;
      e.mu = q.mu;
    } else {
      e.shift = e.c;
    }
  }
}

struct Sums {
  double s[5] = {0, 0, 0, 0, 0};
  double s2[5] = {0, 0, 0, 0, 0};
  std::uint64_t hits[5] = {0, 0, 0, 0, 0};

  void add(int k, double y) {
    s[k] += y;
    s2[k] += y * y;
    if (y != 0.0) ++hits[k];
  }
};

McEstimate summarize(double s, double s2, std::uint64_t hits, std::uint64_t n, double level) {
  McEstimate m;
  m.n = n;
  m.hits = hits;
  m.p_hat = s / static_cast<double>(n);
  const double var = n > 1 ? std::max(0.0, (s2 - s * m.p_hat) / static_cast<double>(n - 1)) : 0.0;
  m.std_err = std::sqrt(var / static_cast<double>(n));
  const double z = normal_quantile(0.5 + 0.5 * level);
  m.ci = {m.p_hat - z * m.std_err, m.p_hat + z * m.std_err};
  return m;
}

int event_slot(Event e) {
  switch (e) {
    case Event::Or: return 0;
    case Event::Sim: return 1;
    case Event::And: return 2;
    case Event::Line1: return 3;
    case Event::Line2: return 4;
  }
  return 0;
}

struct TwoDimSetup {
  Engine engine;
  double gamma[2] = {0, 0};
  bool safe_level = false;
};

TwoDimSetup setup_two(const TwoLineModel& model2, double x1, double x2, const SimConfig& cfg) {
  cfg.validate();
  if (!(x1 >= 0) || !(x2 >= 0) || !std::isfinite(x1) || !std::isfinite(x2)) {
    fail(ErrorKind::OutOfRange, "reserves must be finite and nonnegative");
  }
  TwoDimSetup s;
  Engine& e = s.engine;
  e.x[0] = x1;
  e.x[1] = x2;
  e.p[0] = model2.p1;
  e.p[1] = model2.p2;
  e.T = crossing_time(x1, x2, model2.p1, model2.p2);
  e.ref = 1;
  set_driver(e, model2.line2, cfg);
  try {
    if (model2.line1.is_renewal()) {
      const auto& rn = std::get<Renewal>(model2.driver);
      s.gamma[0] = renewal_adjustment(rn, model2.p1);
      s.gamma[1] = renewal_adjustment(rn, model2.p2);
    } else {
      const AdjustmentData d = adjustment(model2);
      s.gamma[0] = d.gamma1;
      s.gamma[1] = d.gamma2;
    }
  } catch (const RuinError& err) {
    // Without net profit the paths can still be run up to an explicit safe level.
    const auto* sl = std::get_if<SafeLevel>(&cfg.horizon);
    if (err.kind() != ErrorKind::NoAdjustment || cfg.lundberg_mixture || !sl || !(sl->L > 0)) throw;
    s.gamma[0] = s.gamma[1] = 0.0;
  }
  if (cfg.lundberg_mixture) {
    if (!model2.line1.is_renewal()) fail(ErrorKind::InvalidConfig, "lundberg_mixture is for the renewal driver");
    const auto& rn = std::get<Renewal>(model2.driver);
    e.mixture = true;
    e.or_only = true;
    e.inter.clear();
    e.claim.clear();
    for (int i = 0; i < 2; ++i) {
      e.mix_gamma[i] = s.gamma[i];
      e.inter.push_back(rn.interarrival.tilted(-s.gamma[i] * e.p[i]));
      e.claim.push_back(rn.claim.tilted(s.gamma[i]));
    }
    return s;
  }
  if (const auto* ft = std::get_if<FixedTime>(&cfg.horizon)) {
    if (!cfg.tilt) fail(ErrorKind::InvalidHorizon, "a fixed time cannot stand in for an ultimate event without a tilt");
    e.t_max = ft->t;
  } else {
    const double L = std::get<SafeLevel>(cfg.horizon).L;
    if (L > 0 && !(L > std::max(x1, x2))) fail(ErrorKind::InvalidHorizon, "safe level must exceed max(x1, x2)");
    e.safe = L > 0 ? L : 30.0 / std::min(s.gamma[0], s.gamma[1]);
    s.safe_level = true;
  }
  e.h0 = (e.T > 0 ? std::min(e.T, 1.0) : 1.0) / 64;
  e.h1 = 0.25;
  return s;
}

}  // namespace

std::string_view to_string(Censor c) {
  switch (c) {
    case Censor::None: return "none";
    case Censor::FixedTime: return "fixed_time";
    case Censor::SafeLevel: return "safe_level";
    case Censor::Cap: return "cap";
  }
  return "?";
}

void SimConfig::validate() const {
  if (n < 1) fail(ErrorKind::InvalidConfig, "replication count must be at least 1");
  if (!(ci_level > 0 && ci_level < 1)) fail(ErrorKind::InvalidConfig, "ci_level must lie in (0, 1)");
  if (const auto* ft = std::get_if<FixedTime>(&horizon)) {
    if (!(ft->t > 0) || !std::isfinite(ft->t)) fail(ErrorKind::InvalidHorizon, "fixed time must be positive and finite");
  } else if (!(std::get<SafeLevel>(horizon).L >= 0)) {
    fail(ErrorKind::InvalidHorizon, "safe level must be nonnegative");
  }
  if (tilt && !std::isfinite(*tilt)) fail(ErrorKind::InvalidConfig, "tilt must be finite");
  if (tilt && lundberg_mixture) fail(ErrorKind::InvalidConfig, "choose either a tilt or the Lundberg mixture");
}

bool McEstimate::agrees(double value, double k) const { return std::abs(value - p_hat) <= k * std_err; }

std::vector<PathRecord> simulate(const TwoLineModel& model2, double x1, double x2, const SimConfig& config,
                                 std::uint64_t first, std::uint64_t count) {
  const TwoDimSetup s = setup_two(model2, x1, x2, config);
  if (count == 0) count = config.n;
  std::vector<PathRecord> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(run_path(s.engine, config.seed, first + i));
  return out;
}

std::map<Event, McEstimate> estimate_all(const TwoLineModel& model2, double x1, double x2, const SimConfig& config) {
  const TwoDimSetup s = setup_two(model2, x1, x2, config);
  const Engine& e = s.engine;
  const auto blocks = run_blocks<Sums>(config.n, config.workers, [&](std::uint64_t first, std::uint64_t count) {
    Sums sums;
    for (std::uint64_t i = first; i < first + count; ++i) {
      const PathRecord r = run_path(e, config.seed, i);
      sums.add(0, r.w_or);
      sums.add(1, r.w_sim);
      sums.add(2, r.w_and);
      sums.add(3, std::isfinite(r.tau1) ? r.w1 : 0.0);
      sums.add(4, std::isfinite(r.tau2) ? r.w2 : 0.0);
    }
    return sums;
  });
  Sums total;
  for (const Sums& b : blocks) {
    for (int k = 0; k < 5; ++k) {
      total.s[k] += b.s[k];
      total.s2[k] += b.s2[k];
      total.hits[k] += b.hits[k];
    }
  }
  std::map<Event, McEstimate> out;
  for (Event ev : {Event::Or, Event::Sim, Event::And, Event::Line1, Event::Line2}) {
    const int k = event_slot(ev);
    McEstimate m = summarize(total.s[k], total.s2[k], total.hits[k], config.n, config.ci_level);
    if (s.safe_level && s.gamma[0] > 0) {
      const double b1 = std::exp(-s.gamma[0] * e.safe);
      const double b2 = std::exp(-s.gamma[1] * e.safe);
      m.bias_bound = ev == Event::Line1 ? b1 : ev == Event::Line2 ? b2 : b1 + b2;
    } else if (!e.mixture) {
      m.bias_known = false;
      m.bias_bound = kInf;
    }
    out[ev] = m;
  }
  if (e.mixture) {
    // Only OR (and the lines' first passages before it) are observed.
    out.erase(Event::Sim);
    out.erase(Event::And);
    out.erase(Event::Line1);
    out.erase(Event::Line2);
  }
  return out;
}

McEstimate estimate(const TwoLineModel& model2, double x1, double x2, Event event, const SimConfig& config) {
  if (config.lundberg_mixture && event != Event::Or) {
    fail(ErrorKind::InvalidConfig, "the Lundberg mixture estimates the OR event only");
  }
  return estimate_all(model2, x1, x2, config).at(event);
}

McEstimate estimate_line(const LineModel& model, double x, const SimConfig& config) {
  config.validate();
  if (config.lundberg_mixture) fail(ErrorKind::InvalidConfig, "lundberg_mixture needs two lines");
  if (!(x >= 0) || !std::isfinite(x)) fail(ErrorKind::OutOfRange, "reserve must be finite and nonnegative");
  Engine e;
  e.lines = 1;
  e.x[0] = x;
  e.p[0] = model.premium();
  e.ref = 0;
  set_driver(e, model, config);
  double gamma = 0.0;
  bool safe_level = false;
  if (const auto* ft = std::get_if<FixedTime>(&config.horizon)) {
    e.t_max = ft->t;
    e.h0 = e.h1 = std::min(ft->t, 1.0) / 64;
  } else {
    e.h0 = e.h1 = 1.0 / 64;
    const double drift = model.is_renewal() ? 0.0 : model.drift();
    if (model.is_renewal()) {
      const auto& rn = std::get<Renewal>(model.driver());
      if (model.premium() * rn.interarrival.mean() > rn.claim.mean()) gamma = renewal_adjustment(rn, model.premium());
    } else if (drift > 0) {
      gamma = adjustment_coefficient(model);
    }
    const double L = std::get<SafeLevel>(config.horizon).L;
    if (L > 0 && !(L > x)) fail(ErrorKind::InvalidHorizon, "safe level must exceed the reserve");
    if (gamma > 0) {
      e.safe = L > 0 ? L : 30.0 / gamma;
      safe_level = true;
    } else if (L > 0) {
      e.safe = L;
    }
  }
  const auto blocks = run_blocks<Sums>(config.n, config.workers, [&](std::uint64_t first, std::uint64_t count) {
    Sums sums;
    for (std::uint64_t i = first; i < first + count; ++i) {
      const PathRecord r = run_path(e, config.seed, i);
      sums.add(0, std::isfinite(r.tau1) ? r.w1 : 0.0);
    }
    return sums;
  });
  double s = 0, s2 = 0;
  std::uint64_t hits = 0;
  for (const Sums& b : blocks) {
    s += b.s[0];
    s2 += b.s2[0];
    hits += b.hits[0];
  }
  McEstimate m = summarize(s, s2, hits, config.n, config.ci_level);
  if (safe_level) m.bias_bound = std::exp(-gamma * e.safe);
  return m;
}

LimitReport check_lln(const LineModel& model, double x, const SimConfig& config) {
  config.validate();
  if (model.is_renewal()) fail(ErrorKind::UnsupportedDriver, "LLN check needs a Levy line");
  const double drift = model.drift();
  if (!(drift < 0)) fail(ErrorKind::OutOfRange, "LLN check needs kappa'(0) < 0");
  if (!(x > 0)) fail(ErrorKind::OutOfRange, "reserve must be positive");
  Engine e;
  e.lines = 1;
  e.x[0] = x;
  e.p[0] = model.premium();
  e.ref = 0;
  SimConfig plain = config;
  plain.tilt.reset();
  set_driver(e, model, plain);
  e.h0 = e.h1 = 1.0 / 64;
  struct Acc {
    double s = 0;
    std::uint64_t ruined = 0;
  };
  const auto blocks = run_blocks<Acc>(config.n, config.workers, [&](std::uint64_t first, std::uint64_t count) {
    Acc a;
    for (std::uint64_t i = first; i < first + count; ++i) {
      const PathRecord r = run_path(e, config.seed, i);
      if (std::isfinite(r.tau1)) {
        a.s += r.tau1 / x;
        ++a.ruined;
      }
    }
    return a;
  });
  Acc total;
  for (const Acc& b : blocks) {
    total.s += b.s;
    total.ruined += b.ruined;
  }
  LimitReport rep;
  rep.what = "lln_ruin_time";
  rep.paths = config.n;
  rep.conditioned = total.ruined;
  rep.effective_size = static_cast<double>(total.ruined);
  rep.expected = -1.0 / drift;
  rep.statistic = total.ruined ? total.s / static_cast<double>(total.ruined) : kInf;
  rep.threshold = 0.1;
  rep.passed = std::abs(rep.statistic / rep.expected - 1.0) < rep.threshold;
  return rep;
}

LimitReport check_limit_law(const LineModel& model, double v, LawSide side, double t, const SimConfig& config) {
  config.validate();
  if (!(t > 0) || !std::isfinite(t)) fail(ErrorKind::OutOfRange, "time must be positive");
  const LimitLaw law = limit_law(model, v, side);
  const double theta = law.theta_v;
  const double x = v * t;
  Engine e;
  e.lines = 1;
  e.x[0] = x;
  e.p[0] = model.premium();
  e.ref = 0;
  SimConfig tilted = config;
  tilted.tilt = theta;
  set_driver(e, model, tilted);
  e.t_max = t;
  e.to_horizon = true;
  const bool ruin_side = side == LawSide::ConditionedOnRuin;

  struct Sample {
    double y;
    double log_w;
  };
  const double pt = model.premium() + (model.is_brownian() ? theta : 0.0);
  const auto blocks =
      run_blocks<std::vector<Sample>>(config.n, config.workers, [&](std::uint64_t first, std::uint64_t count) {
        std::vector<Sample> out;
        for (std::uint64_t i = first; i < first + count; ++i) {
          Substream rng(config.seed, i);
          double y;
          bool ruined;
          if (e.kind == Engine::Kind::Brownian) {
            // One exact step: X(t) is Gaussian and, given it, the path is a bridge.
            y = x + pt * t + std::sqrt(t) * rng.normal();
            ruined = y <= 0 || rng.uniform() < std::exp(-2.0 * x * y / t);
          } else {
            const PathRecord r = jump_path(e, rng, &y);
            ruined = std::isfinite(r.tau1);
          }
          if (ruined != ruin_side) continue;
          out.push_back({y, -theta * (y - x) + e.kappa_c * t});
        }
        return out;
      });
  std::vector<Sample> all;
  for (const auto& b : blocks) all.insert(all.end(), b.begin(), b.end());
  LimitReport rep;
  rep.what = std::string("limit_law:") + std::string(to_string(side));
  rep.paths = config.n;
  rep.conditioned = all.size();
  rep.threshold = 0.05;
  if (all.size() < 1000) {
    fail(ErrorKind::InsufficientConditionedSamples,
         "only " + std::to_string(all.size()) + " paths met the conditioning event");
  }
  std::sort(all.begin(), all.end(), [](const Sample& a, const Sample& b) { return a.y < b.y; });
  double top = -kInf;
  for (const Sample& s : all) top = std::max(top, s.log_w);
  double sw = 0, sw2 = 0;
  std::vector<double> w(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    w[i] = std::exp(all[i].log_w - top);
    sw += w[i];
    sw2 += w[i] * w[i];
  }
  rep.effective_size = sw * sw / sw2;
  double cum = 0, ks = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const double F = law.cdf(all[i].y);
    ks = std::max(ks, std::abs(cum / sw - F));
    cum += w[i];
    ks = std::max(ks, std::abs(cum / sw - F));
  }
  rep.statistic = ks;
  rep.passed = ks < rep.threshold;
  return rep;
}

}  // namespace ruin
