#include "ruin/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "ruin/cones.hpp"
#include "ruin/errors.hpp"

namespace ruin::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

Distribution parse_distribution(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  const auto num = [&](std::size_t i) {
    if (i >= parts.size()) fail(ErrorKind::InvalidConfig, "distribution '" + text + "' is missing a parameter");
    try {
      return std::stod(parts[i]);
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidConfig, "bad number in distribution '" + text + "'");
    }
  };
  if (parts.empty()) fail(ErrorKind::InvalidConfig, "empty distribution");
  if (parts[0] == "det" || parts[0] == "deterministic") return Distribution::deterministic(num(1));
  if (parts[0] == "exp" || parts[0] == "exponential") return Distribution::exponential(num(1));
  if (parts[0] == "gamma") return Distribution::gamma(num(1), num(2));
  fail(ErrorKind::InvalidConfig, "unknown distribution '" + parts[0] + "' (det, exp, gamma)");
}

bool has_raw(const RunConfig& c) { return c.c1 || c.c2 || c.delta1 || c.delta2 || c.u1 || c.u2; }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

bool is_refusal(ErrorKind k) {
  switch (k) {
    case ErrorKind::BoundaryRay:
    case ErrorKind::BoundaryVelocity:
    case ErrorKind::NoAdjustment:
    case ErrorKind::NoConjugate:
    case ErrorKind::NoSignChange:
    case ErrorKind::MaxIterations:
    case ErrorKind::CrossCheckFailed:
    case ErrorKind::InsufficientConditionedSamples:
      return true;
    default:
      return false;
  }
}

struct Point {
  double x1, x2;
  std::optional<double> a, K;
};

std::vector<Point> points(const RunConfig& c) {
  std::vector<Point> out;
  if (c.ray_mode()) {
    for (double K : c.K) out.push_back({*c.a * K, K, c.a, K});
  } else if (c.u1 && c.u2) {
    const auto cc = scale_to_canonical(*c.u1, *c.u2, c.c1.value_or(c.p1), c.c2.value_or(c.p2), *c.delta1, *c.delta2);
    out.push_back({cc.x1, cc.x2, std::nullopt, std::nullopt});
  } else {
    out.push_back({*c.x1, *c.x2, std::nullopt, std::nullopt});
  }
  return out;
}

std::string cone_of(const TwoLineModel& m, double x1, double x2, Event e) {
  if (e == Event::Line1 || e == Event::Line2 || m.line1.is_renewal()) return "";
  if (!(x1 > 0) || !(x2 > 0)) return "";
  if (e == Event::Or && !(x2 > x1)) return std::string(to_string(ConeLabel::LowerCone));
  return std::string(to_string(classify(m, x1, x2, e == Event::And ? PartitionKind::And : PartitionKind::Sim)));
}

struct Value {
  double value = 0.0;
  double log_value = 0.0;
  std::string cone;
  ordered_json diagnostics = ordered_json::object();
};

ordered_json mc_diagnostics(const McEstimate& m) {
  ordered_json d = ordered_json::object();
  d["std_err"] = m.std_err;
  d["ci_lo"] = m.ci.lo;
  d["ci_hi"] = m.ci.hi;
  d["n"] = m.n;
  d["hits"] = m.hits;
  if (m.bias_known) d["bias_bound"] = m.bias_bound;
  return d;
}

Value evaluate(const TwoLineModel& m, const RunConfig& c, Method method, Event event, const Point& pt,
               std::map<Event, McEstimate>* mc_cache) {
  Value v;
  switch (method) {
    case Method::Exact: {
      const RuinEstimate r = exact(m, RuinQuery{event, pt.x1, pt.x2, Method::Exact});
      v.value = r.value;
      v.log_value = r.log_value;
      for (const auto& [k, x] : r.diagnostics) v.diagnostics[k] = x;
      if (r.quad_err > 0) v.diagnostics["quad_err"] = r.quad_err;
      v.cone = cone_of(m, pt.x1, pt.x2, event);
      break;
    }
    case Method::TwoTerm: {
      ExpansionTerms t = [&] {
        switch (event) {
          case Event::Or: return two_term_or(m, pt.x1, pt.x2);
          case Event::Sim: return two_term_sim(m, pt.x1, pt.x2);
          case Event::And: return two_term_and(m, pt.x1, pt.x2);
          default: fail(ErrorKind::InvalidConfig, "two-term expansions cover or, sim and and");
        }
      }();
      v.value = t.total();
      v.log_value = t.log_total();
      v.diagnostics["term1"] = t.term1;
      v.diagnostics["term2"] = t.term2;
      for (const auto& [k, x] : t.constants) v.diagnostics[k] = x;
      v.cone = std::string(to_string(t.cone));
      break;
    }
    case Method::Leading: {
      const RuinEstimate r = leading(m, pt.x1, pt.x2, event);
      v.value = r.value;
      v.log_value = r.log_value;
      if (r.cone) v.cone = std::string(to_string(*r.cone));
      for (const auto& [k, x] : r.diagnostics) v.diagnostics[k] = x;
      break;
    }
    case Method::MC: {
      if (mc_cache->empty()) *mc_cache = estimate_all(m, pt.x1, pt.x2, c.mc);
      const auto it = mc_cache->find(event);
      if (it == mc_cache->end()) fail(ErrorKind::InvalidConfig, "the Lundberg mixture estimates the or event only");
      v.value = it->second.p_hat;
      v.log_value = std::log(v.value);
      v.diagnostics = mc_diagnostics(it->second);
      v.cone = cone_of(m, pt.x1, pt.x2, event);
      break;
    }
  }
  return v;
}

OutputRow base_row(const Point& pt, Event e, Method method) {
  OutputRow r;
  r.x1 = pt.x1;
  r.x2 = pt.x2;
  r.a = pt.a;
  r.K = pt.K;
  r.event = std::string(to_string(e));
  r.method = std::string(to_string(method));
  return r;
}

void fill(OutputRow& r, const Value& v, const Point& pt) {
  r.value = v.value;
  r.cone = v.cone;
  r.diagnostics = v.diagnostics;
  if (pt.K) r.exponent = -v.log_value / *pt.K;
}

std::vector<OutputRow> cone_rows(const TwoLineModel& m, const RunConfig& c) {
  std::vector<OutputRow> rows;
  const ConePartition part = partition(m);
  const AdjustmentData d = adjustment(m);
  OutputRow head;
  head.event = "partition";
  head.method = "cones";
  head.diagnostics["s1"] = part.s1;
  head.diagnostics["s2"] = part.s2;
  head.diagnostics["s3"] = part.s3;
  head.diagnostics["d2_empty"] = part.d2_empty;
  head.diagnostics["gamma1"] = d.gamma1;
  head.diagnostics["gamma2"] = d.gamma2;
  head.diagnostics["gamma3"] = d.gamma3;
  rows.push_back(head);
  const double extent = c.K.empty() ? 20.0 : *std::max_element(c.K.begin(), c.K.end());
  constexpr int kGrid = 20;
  for (int i = 1; i <= kGrid; ++i) {
    for (int j = 1; j <= kGrid; ++j) {
      const double x1 = extent * i / kGrid;
      const double x2 = extent * j / kGrid;
      for (PartitionKind kind : {PartitionKind::Sim, PartitionKind::And}) {
        OutputRow r;
        r.x1 = x1;
        r.x2 = x2;
        r.event = kind == PartitionKind::Sim ? "sim" : "and";
        r.method = "cones";
        r.cone = std::string(to_string(classify(m, part, x1, x2, kind)));
        rows.push_back(r);
      }
    }
  }
  return rows;
}

// Flags mirror the config keys; a flag that was given overrides the file.
struct FlagSet {
  std::string config_path;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> setters;
};

template <class T>
void flag(CLI::App* app, FlagSet& fs, const std::string& name, const std::string& help,
          std::function<void(RunConfig&, const T&)> set) {
  auto holder = std::make_shared<T>();
  CLI::Option* opt = app->add_option(name, *holder, help);
  if constexpr (std::is_same_v<T, std::vector<std::string>> || std::is_same_v<T, std::vector<double>>) {
    opt->delimiter(',');
  }
  fs.setters.emplace_back(opt, [holder, set](RunConfig& c) { set(c, *holder); });
}

void add_flags(CLI::App* app, FlagSet& fs) {
  app->add_option("--config", fs.config_path, "JSON config with blocks model, query, mc, output");
  using S = std::string;
  using D = double;
  flag<S>(app, fs, "--driver", "cpe | brownian | renewal", [](RunConfig& c, const S& v) { c.driver = v; });
  flag<D>(app, fs, "--lambda", "claim arrival rate", [](RunConfig& c, D v) { c.lambda = v; });
  flag<D>(app, fs, "--mu", "exponential claim rate", [](RunConfig& c, D v) { c.mu = v; });
  flag<S>(app, fs, "--interarrival", "renewal interarrival law", [](RunConfig& c, const S& v) { c.interarrival = v; });
  flag<S>(app, fs, "--claim", "renewal claim law", [](RunConfig& c, const S& v) { c.claim = v; });
  flag<D>(app, fs, "--p1", "premium rate of line 1", [](RunConfig& c, D v) { c.p1 = v; });
  flag<D>(app, fs, "--p2", "premium rate of line 2", [](RunConfig& c, D v) { c.p2 = v; });
  flag<D>(app, fs, "--u1", "raw reserve 1", [](RunConfig& c, D v) { c.u1 = v; });
  flag<D>(app, fs, "--u2", "raw reserve 2", [](RunConfig& c, D v) { c.u2 = v; });
  flag<D>(app, fs, "--c1", "raw premium 1", [](RunConfig& c, D v) { c.c1 = v; });
  flag<D>(app, fs, "--c2", "raw premium 2", [](RunConfig& c, D v) { c.c2 = v; });
  flag<D>(app, fs, "--delta1", "claim proportion 1", [](RunConfig& c, D v) { c.delta1 = v; });
  flag<D>(app, fs, "--delta2", "claim proportion 2", [](RunConfig& c, D v) { c.delta2 = v; });

  flag<std::vector<S>>(app, fs, "--event", "or, sim, and, line1, line2", [](RunConfig& c, const std::vector<S>& v) {
    c.events.clear();
    for (const auto& s : v) c.events.push_back(parse_event(s));
  });
  flag<std::vector<S>>(app, fs, "--method", "exact, twoterm, leading, mc", [](RunConfig& c, const std::vector<S>& v) {
    c.methods.clear();
    for (const auto& s : v) c.methods.push_back(parse_method(s));
  });
  flag<D>(app, fs, "--x1", "reserve of line 1", [](RunConfig& c, D v) { c.x1 = v; });
  flag<D>(app, fs, "--x2", "reserve of line 2", [](RunConfig& c, D v) { c.x2 = v; });
  flag<D>(app, fs, "--a", "ray slope: reserves (aK, K)", [](RunConfig& c, D v) { c.a = v; });
  flag<std::vector<D>>(app, fs, "--K", "ray scales", [](RunConfig& c, const std::vector<D>& v) { c.K = v; });

  flag<std::uint64_t>(app, fs, "--n", "replications", [](RunConfig& c, std::uint64_t v) { c.mc.n = v; });
  flag<std::uint64_t>(app, fs, "--seed", "RNG seed", [](RunConfig& c, std::uint64_t v) { c.mc.seed = v; });
  flag<D>(app, fs, "--fixed-time", "stop paths at this time", [](RunConfig& c, D v) { c.mc.horizon = FixedTime{v}; });
  flag<D>(app, fs, "--safe-level", "safe level above the start", [](RunConfig& c, D v) { c.mc.horizon = SafeLevel{v}; });
  flag<D>(app, fs, "--tilt", "exponential tilt of the driver", [](RunConfig& c, D v) { c.mc.tilt = v; });
  flag<bool>(app, fs, "--lundberg-mixture", "renewal OR importance sampling",
             [](RunConfig& c, bool v) { c.mc.lundberg_mixture = v; });
  flag<D>(app, fs, "--ci-level", "confidence level", [](RunConfig& c, D v) { c.mc.ci_level = v; });
  flag<unsigned>(app, fs, "--workers", "threads (0: all cores)", [](RunConfig& c, unsigned v) { c.mc.workers = v; });

  flag<S>(app, fs, "--format", "csv | json", [](RunConfig& c, const S& v) { c.format = v; });
  flag<S>(app, fs, "--out", "output path, - for stdout", [](RunConfig& c, const S& v) { c.path = v; });
}

template <class T>
void get_opt(const json& obj, const char* key, std::optional<T>& dst) {
  if (obj.contains(key) && !obj.at(key).is_null()) dst = obj.at(key).get<T>();
}

template <class T>
void get(const json& obj, const char* key, T& dst) {
  if (obj.contains(key) && !obj.at(key).is_null()) dst = obj.at(key).get<T>();
}

std::vector<std::string> string_list(const json& v) {
  if (v.is_string()) return {v.get<std::string>()};
  return v.get<std::vector<std::string>>();
}

}  // namespace

void RunConfig::validate() const {
  if (driver != "cpe" && driver != "brownian" && driver != "renewal") {
    fail(ErrorKind::InvalidConfig, "driver must be cpe, brownian or renewal");
  }
  if (!(lambda > 0) || !(mu > 0)) fail(ErrorKind::InvalidConfig, "rates must be positive");
  const bool reserves = (x1 || x2) || (u1 || u2);
  if (reserves && ray_mode()) fail(ErrorKind::InvalidConfig, "give either reserves or a ray, not both");
  if (!reserves && !ray_mode()) fail(ErrorKind::InvalidConfig, "give reserves (x1, x2) or a ray (a, K)");
  if (ray_mode()) {
    if (!(*a > 0) || !std::isfinite(*a)) fail(ErrorKind::InvalidConfig, "ray slope a must be positive");
    if (K.empty()) fail(ErrorKind::InvalidConfig, "a ray needs a K list");
    for (double k : K) {
      if (!(k > 0) || !std::isfinite(k)) fail(ErrorKind::InvalidConfig, "K values must be positive");
    }
  } else if (u1 || u2) {
    if (!(u1 && u2 && delta1 && delta2)) fail(ErrorKind::InvalidConfig, "raw reserves need u1, u2, delta1, delta2");
  } else {
    if (!(x1 && x2)) fail(ErrorKind::InvalidConfig, "both x1 and x2 are needed");
    if (!(*x1 >= 0) || !(*x2 >= 0)) fail(ErrorKind::InvalidConfig, "reserves must be nonnegative");
  }
  (void)parse_format(format);
  mc.validate();
}

ClaimDriver RunConfig::make_driver() const {
  if (driver == "cpe") return CompoundPoissonExp{lambda, mu};
  if (driver == "brownian") return StandardBrownian{};
  if (driver == "renewal") return Renewal{parse_distribution(interarrival), parse_distribution(claim)};
  fail(ErrorKind::InvalidConfig, "driver must be cpe, brownian or renewal");
}

TwoLineModel RunConfig::make_model() const {
  double q1 = p1;
  double q2 = p2;
  if (has_raw(*this)) {
    if (!(delta1 && delta2)) fail(ErrorKind::InvalidProportions, "raw premiums need delta1 and delta2");
    const auto cc = scale_to_canonical(u1.value_or(0), u2.value_or(0), c1.value_or(p1), c2.value_or(p2), *delta1, *delta2);
    q1 = cc.p1;
    q2 = cc.p2;
  }
  if (!(q1 > q2)) fail(ErrorKind::InvalidModel, "p1 > p2 is required (got p1 = " + fmt(q1) + ", p2 = " + fmt(q2) + ")");
  const ClaimDriver d = make_driver();
  TwoLineModel m = make_two_line(d, q1, q2);
  if (const auto* rn = std::get_if<Renewal>(&d)) {
    if (!(q2 * rn->interarrival.mean() > rn->claim.mean())) {
      fail(ErrorKind::InvalidModel, "net-profit condition fails: p2 E[A] <= E[Y]");
    }
  } else if (!(m.line2.drift() > 0)) {
    fail(ErrorKind::InvalidModel, "net-profit condition fails: kappa_2'(0) <= 0");
  }
  return m;
}

void apply_json(const json& doc, RunConfig& c) {
  if (!doc.is_object()) fail(ErrorKind::InvalidConfig, "config must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "model" && key != "query" && key != "mc" && key != "output") {
      fail(ErrorKind::InvalidConfig, "unknown config block '" + key + "'");
    }
  }
  if (doc.contains("model")) {
    const json& m = doc["model"];
    get(m, "driver", c.driver);
    get(m, "lambda", c.lambda);
    get(m, "mu", c.mu);
    get(m, "interarrival", c.interarrival);
    get(m, "claim", c.claim);
    get(m, "p1", c.p1);
    get(m, "p2", c.p2);
    if (m.contains("raw")) {
      const json& r = m["raw"];
      get_opt(r, "u1", c.u1);
      get_opt(r, "u2", c.u2);
      get_opt(r, "c1", c.c1);
      get_opt(r, "c2", c.c2);
      get_opt(r, "delta1", c.delta1);
      get_opt(r, "delta2", c.delta2);
    }
  }
  if (doc.contains("query")) {
    const json& q = doc["query"];
    if (q.contains("event")) {
      c.events.clear();
      for (const auto& s : string_list(q["event"])) c.events.push_back(parse_event(s));
    }
    if (q.contains("method")) {
      c.methods.clear();
      for (const auto& s : string_list(q["method"])) c.methods.push_back(parse_method(s));
    }
    get_opt(q, "x1", c.x1);
    get_opt(q, "x2", c.x2);
    get_opt(q, "a", c.a);
    if (q.contains("K")) c.K = q["K"].is_array() ? q["K"].get<std::vector<double>>() : std::vector<double>{q["K"].get<double>()};
  }
  if (doc.contains("mc")) {
    const json& m = doc["mc"];
    get(m, "n", c.mc.n);
    get(m, "seed", c.mc.seed);
    if (m.contains("fixed_time")) c.mc.horizon = FixedTime{m["fixed_time"].get<double>()};
    if (m.contains("safe_level")) c.mc.horizon = SafeLevel{m["safe_level"].get<double>()};
    get_opt(m, "tilt", c.mc.tilt);
    get(m, "lundberg_mixture", c.mc.lundberg_mixture);
    get(m, "ci_level", c.mc.ci_level);
    get(m, "workers", c.mc.workers);
  }
  if (doc.contains("output")) {
    get(doc["output"], "format", c.format);
    get(doc["output"], "path", c.path);
  }
}

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  fail(ErrorKind::InvalidConfig, "format must be csv or json");
}

std::string to_csv(const std::vector<OutputRow>& rows) {
  std::string out = "x1,x2,a,K,event,method,value,cone,exponent,diagnostics\n";
  const auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  for (const OutputRow& r : rows) {
    out += fmt(r.x1) + ',' + fmt(r.x2) + ',' + opt(r.a) + ',' + opt(r.K) + ',' + csv_field(r.event) + ',' +
           csv_field(r.method) + ',' + opt(r.value) + ',' + csv_field(r.cone) + ',' + opt(r.exponent) + ',' +
           csv_field(r.diagnostics.dump()) + '\n';
  }
  return out;
}

ordered_json to_json(const std::vector<OutputRow>& rows) {
  ordered_json arr = ordered_json::array();
  const auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  for (const OutputRow& r : rows) {
    ordered_json o;
    o["x1"] = r.x1;
    o["x2"] = r.x2;
    o["a"] = opt(r.a);
    o["K"] = opt(r.K);
    o["event"] = r.event;
    o["method"] = r.method;
    o["value"] = opt(r.value);
    o["cone"] = r.cone;
    o["exponent"] = opt(r.exponent);
    o["diagnostics"] = r.diagnostics;
    arr.push_back(std::move(o));
  }
  return arr;
}

void emit(const std::vector<OutputRow>& rows, Format format, const std::string& destination, std::ostream& out) {
  const std::string text = format == Format::Csv ? to_csv(rows) : to_json(rows).dump(2) + "\n";
  if (destination == "-" || destination.empty()) {
    out << text;
    out.flush();
    if (!out) throw std::ios_base::failure("cannot write to standard output");
    return;
  }
  std::ofstream f(destination, std::ios::binary);
  if (!f) throw std::ios_base::failure("cannot open " + destination + " for writing");
  f << text;
  f.flush();
  if (!f) throw std::ios_base::failure("write to " + destination + " failed");
}

std::vector<OutputRow> compute_rows(const std::string& sub, const RunConfig& cfg) {
  const TwoLineModel m = cfg.make_model();
  if (sub == "cones") return cone_rows(m, cfg);
  cfg.validate();
  if (sub == "sweep" && !cfg.ray_mode()) fail(ErrorKind::InvalidConfig, "sweep needs a ray (a, K)");

  std::vector<Event> events = cfg.events;
  if (events.empty()) events = {Event::Or, Event::Sim, Event::And};
  std::vector<Method> methods = cfg.methods;
  if (methods.empty()) {
    if (sub == "mc") {
      methods = {Method::MC};
    } else if (sub == "compare") {
      methods = {Method::Exact, Method::TwoTerm, Method::Leading, Method::MC};
    } else {
      methods = {Method::Exact};
    }
  }
  if (sub == "mc") methods = {Method::MC};

  std::vector<OutputRow> rows;
  for (const Point& pt : points(cfg)) {
    std::map<Event, McEstimate> mc_cache;
    for (Event ev : events) {
      if (sub != "compare") {
        for (Method me : methods) {
          OutputRow r = base_row(pt, ev, me);
          fill(r, evaluate(m, cfg, me, ev, pt, &mc_cache), pt);
          rows.push_back(std::move(r));
        }
        continue;
      }
      // Side by side against the exact value; refusals become empty rows.
      const Value ex = evaluate(m, cfg, Method::Exact, ev, pt, &mc_cache);
      for (Method me : methods) {
        OutputRow r = base_row(pt, ev, me);
        if (me == Method::Exact) {
          fill(r, ex, pt);
          r.diagnostics["ratio"] = 1.0;
          rows.push_back(std::move(r));
          continue;
        }
        try {
          const Value v = evaluate(m, cfg, me, ev, pt, &mc_cache);
          fill(r, v, pt);
          r.diagnostics["ratio"] = std::exp(v.log_value - ex.log_value);
          if (me == Method::MC) {
            const double se = r.diagnostics["std_err"].get<double>();
            r.diagnostics["agree"] = std::abs(v.value - ex.value) <= 3.0 * se;
          }
        } catch (const RuinError& e) {
          if (!is_refusal(e.kind()) && e.kind() != ErrorKind::InvalidConfig && e.kind() != ErrorKind::OutOfRange) throw;
          r.diagnostics["refused"] = e.what();
        }
        rows.push_back(std::move(r));
      }
    }
  }
  return rows;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ruin probabilities of the two-line risk process"};
  app.require_subcommand(1);
  std::map<std::string, FlagSet> flagsets;
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"compute", "one row per (event, method)"},
      {"sweep", "rows along the ray (aK, K)"},
      {"cones", "cone slopes, exponents and a label grid"},
      {"mc", "Monte Carlo estimates with confidence intervals"},
      {"compare", "methods side by side with ratios to the exact value"}};
  for (const auto& [name, help] : subs) add_flags(app.add_subcommand(name, help), flagsets[name]);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream os, es;
    const int code = app.exit(e, os, es);
    out << os.str();
    err << es.str();
    return code == 0 ? kOk : kInvalidConfig;
  }
  std::string sub;
  for (const auto& [name, _] : subs) {
    if (app.got_subcommand(name)) sub = name;
  }
  const FlagSet& fs = flagsets[sub];

  RunConfig cfg;
  try {
    if (!fs.config_path.empty()) {
      std::ifstream f(fs.config_path);
      if (!f) {
        err << "error: cannot read config " << fs.config_path << "\n";
        return kIoError;
      }
      apply_json(json::parse(f), cfg);
    }
    for (const auto& [opt, set] : fs.setters) {
      if (opt->count() > 0) set(cfg);
    }
    const Format format = parse_format(cfg.format);
    const std::vector<OutputRow> rows = compute_rows(sub, cfg);
    emit(rows, format, cfg.path, out);
  } catch (const RuinError& e) {
    err << (is_refusal(e.kind()) ? "refused: " : "error: ") << e.what() << "\n";
    return is_refusal(e.kind()) ? kRefused : kInvalidConfig;
  } catch (const json::exception& e) {
    err << "error: config: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kOk;
}

}  // namespace ruin::cli
