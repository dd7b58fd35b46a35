#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ruin/montecarlo.hpp"
#include "ruin/twodim.hpp"

namespace ruin::cli {

enum ExitCode { kOk = 0, kInvalidConfig = 2, kRefused = 3, kIoError = 4 };

/// Model, query, MC and output settings, merged from the config file and the flags.
struct RunConfig {
  // model
  std::string driver = "cpe";  // cpe | brownian | renewal
  double lambda = 1.0;
  double mu = 2.0;
  std::string interarrival = "exp:1";  // renewal only: det:v | exp:rate | gamma:shape:rate
  std::string claim = "exp:2";
  double p1 = 3.0;
  double p2 = 1.0;
  // raw (u, c, delta) pairs, rescaled to unit proportions
  std::optional<double> u1, u2, c1, c2, delta1, delta2;

  // query
  std::vector<Event> events;
  std::vector<Method> methods;
  std::optional<double> x1, x2;
  std::optional<double> a;
  std::vector<double> K;

  // mc
  SimConfig mc;

  // output
  std::string format = "csv";
  std::string path = "-";

  bool ray_mode() const { return a.has_value(); }
  /// Throws InvalidConfig / InvalidModel / InvalidProportions.
  void validate() const;
  ClaimDriver make_driver() const;
  /// Applies the raw triple, if any; checks p1 > p2 and the net-profit condition.
  TwoLineModel make_model() const;
};

/// Reads the blocks {model, query, mc, output} of a config document into cfg.
void apply_json(const nlohmann::json& doc, RunConfig& cfg);

struct OutputRow {
  double x1 = 0.0;
  double x2 = 0.0;
  std::optional<double> a;
  std::optional<double> K;
  std::string event;
  std::string method;
  std::optional<double> value;
  std::string cone;
  std::optional<double> exponent;
  nlohmann::ordered_json diagnostics = nlohmann::ordered_json::object();
};

enum class Format { Csv, Json };

Format parse_format(const std::string& s);

/// Writes rows to `destination` ("-" for out). Throws std::ios_base::failure.
void emit(const std::vector<OutputRow>& rows, Format format, const std::string& destination, std::ostream& out);

std::string to_csv(const std::vector<OutputRow>& rows);
nlohmann::ordered_json to_json(const std::vector<OutputRow>& rows);

/// Rows of the subcommand for an already merged config.
std::vector<OutputRow> compute_rows(const std::string& subcommand, const RunConfig& cfg);

/// Full command line (without the program name). Rows go to the configured
/// destination, refusals and errors to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ruin::cli
