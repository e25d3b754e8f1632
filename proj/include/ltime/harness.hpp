#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltime/localtime.hpp"
#include "ltime/stopping.hpp"

namespace ltime {

struct ExperimentSpec {
  StoppingRule rule = StoppingRule::first_exit(-1.0, 1.0);
  std::vector<double> xs;
  std::size_t n_paths = 50000;
  double dt = 1e-4;
  std::optional<double> epsilon;  // default_epsilon(dt) when unset
  std::vector<Method> methods{Method::occupation};
  std::uint64_t seed = 0;
  std::optional<double> cap;  // 64 sigma^2 when unset
  unsigned threads = 1;
  bool bridge_correction = true;
  bool keep_terminals = false;

  [[nodiscard]] double effective_epsilon() const { return epsilon ? *epsilon : default_epsilon(dt); }
};

struct MethodEstimate {
  Method method;
  double estimate;
  double std_error;
  std::size_t n_paths;
  double capped_fraction;
};

struct SummaryRow {
  double x;
  double sigma;
  double bound;
  std::optional<double> exact;
  std::vector<MethodEstimate> estimates;
};

struct EstimateSummary {
  std::vector<SummaryRow> rows;  // ordered by x
  double dt = 0.0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::size_t n_paths = 0;
  double capped_fraction = 0.0;
  Accumulator stopping_time;
  std::vector<double> terminals;
  std::vector<std::string> warnings;
};

EstimateSummary run_experiment(const ExperimentSpec& spec);

struct SweepResult {
  double sigma;
  EstimateSummary summary;
  /// MC occupation estimate / bound, per row.
  std::vector<double> ratios;
};

/// For each x, runs the optimal first exit for (x, sigma) and reports the
/// occupation estimate next to the bound it should attain.
SweepResult run_sweep(double sigma, std::span<const double> xs, std::size_t n_paths, double dt, double epsilon,
                      std::uint64_t seed, unsigned threads = 1);

/// Flat `key=value` lines; `#` starts a comment. Keys: rule, xs, paths, dt,
/// epsilon, methods, seed, cap, threads, bridge.
using SettingMap = std::map<std::string, std::string, std::less<>>;
SettingMap parse_settings(std::string_view text);
/// Errc::ValidationError naming the offending field.
ExperimentSpec build_spec(const SettingMap& settings);
ExperimentSpec parse_spec(std::string_view text);

/// `a,b,c` or `start:stop:step` (inclusive of stop within 1e-9 step).
std::vector<double> parse_levels(std::string_view text);

inline constexpr std::string_view kCsvHeader =
    "x,sigma,bound,exact,method,estimate,std_error,n_paths,dt,epsilon,capped_fraction,seed";

/// One line per (x, method), full precision.
void write_csv(std::ostream& os, const EstimateSummary& summary);
nlohmann::json to_json(const EstimateSummary& summary);

/// Shortest round-tripping decimal form of v.
std::string format_full(double v);
/// 6 significant digits.
std::string format_short(double v);

}  // namespace ltime
