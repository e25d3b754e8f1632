#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ltime/brownian.hpp"
#include "ltime/distributions.hpp"
#include "ltime/stopping.hpp"

namespace ltime {

enum class Method { occupation, upcrossing, exact };

std::string_view to_string(Method method) noexcept;
Method parse_method(std::string_view text);

struct LocalTimeEstimate {
  double x = 0.0;
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  Method method = Method::exact;
  std::optional<double> epsilon;
  double capped_fraction = 0.0;
  std::vector<std::string> warnings;
};

/// E[L_x(tau)] from the law of X = B(tau) alone: 2 E[(X - x)^+] for x >= 0
/// and 2 E[(X - x)^-] for x <= 0. Errc::NonZeroMean if the law is not
/// centred (1e-12 for finite support).
double exact_expected_local_time(const TerminalDistribution& dist, double x);

/// max(5 sqrt(dt), dt^0.4).
inline double default_epsilon(double dt) { return std::max(5.0 * std::sqrt(dt), std::pow(dt, 0.4)); }

/// (1 / 2 eps) * dt * #{k <= stopped_index : |values[k] - x| < eps}.
double estimate_occupation(const PathGrid& path, double x, double epsilon);

/// Completed passages from a sample <= lower to a later sample >= upper.
std::size_t count_upcrossings(const PathGrid& path, double lower, double upper);

enum class UpcrossingScale {
  /// 2 eps per upcrossing.
  nominal,
  /// 2 (eps + 2 beta sqrt(dt)) per upcrossing. Grid sampling of Brownian
  /// motion misses the extremes of each passage; on average each level is
  /// effectively pushed outward by beta sqrt(dt).
  grid_corrected,
};

/// -zeta(1/2) / sqrt(2 pi).
inline constexpr double kDiscreteMonitoringShift = 0.5825971579390106;

/// Upcrossing local-time estimate over (x, x + eps) for x >= 0 and
/// (x - eps, x) for x < 0.
double estimate_via_upcrossings(const PathGrid& path, double x, double epsilon,
                                UpcrossingScale scale = UpcrossingScale::grid_corrected);

/// Streaming (count, mean, M2) accumulator; partial accumulators merge with
/// the pairwise update so a fixed partition gives a fixed result.
class Accumulator {
 public:
  void add(double v) noexcept {
    ++count_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (v - mean_);
  }

  void merge(const Accumulator& other) noexcept;

  [[nodiscard]] std::size_t count() const noexcept { return count_; }
  [[nodiscard]] double mean() const noexcept { return mean_; }
  [[nodiscard]] double m2() const noexcept { return m2_; }
  /// Sample variance (n - 1 denominator); 0 below two observations.
  [[nodiscard]] double variance() const noexcept {
    return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
  }
  [[nodiscard]] double std_error() const noexcept {
    return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct EnsembleOptions {
  std::size_t n_paths = 50000;
  PathOptions path;
  double epsilon = 0.02;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  UpcrossingScale upcrossing_scale = UpcrossingScale::grid_corrected;
  bool keep_terminals = false;
};

/// Accumulated per-path estimates for a fixed set of levels and methods.
/// Capped paths contribute nothing except to `capped`.
struct EnsembleResult {
  std::vector<double> levels;
  std::vector<Method> methods;
  std::vector<Accumulator> estimates;  // row-major [level][method]
  Accumulator stopping_time;
  Accumulator terminal_square;
  std::size_t n_paths = 0;
  std::size_t capped = 0;
  std::vector<double> terminals;  // uncapped paths, path order (if requested)

  [[nodiscard]] const Accumulator& at(std::size_t level, std::size_t method) const {
    return estimates[level * methods.size() + method];
  }
  [[nodiscard]] double capped_fraction() const noexcept {
    return n_paths ? static_cast<double>(capped) / static_cast<double>(n_paths) : 0.0;
  }
};

/// Simulates paths 0..n_paths-1 with stream_id = path index. Paths are
/// processed in fixed blocks merged in block order, so the result depends
/// on the seed and not on the thread count. `Method::exact` entries are
/// ignored here.
EnsembleResult run_ensemble(const StoppingRule& rule, std::span<const double> levels,
                            std::span<const Method> methods, const EnsembleOptions& options);

/// 64 sigma^2 for rules with a closed-form terminal law, else 64.
double default_cap_for(const StoppingRule& rule);

/// Monte Carlo E[L_x(tau)] for a single level. Method::exact returns the
/// closed-form value for rules with a known terminal law. Errc::AllPathsCapped
/// if no path stopped.
LocalTimeEstimate mc_expected_local_time(const StoppingRule& rule, double x, std::size_t n_paths, double dt,
                                         double epsilon, Method method, std::uint64_t seed,
                                         std::optional<double> cap = std::nullopt, unsigned threads = 1);

}  // namespace ltime
