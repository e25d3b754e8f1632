#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ltime/random.hpp"
#include "ltime/stopping.hpp"

namespace ltime {

/// One simulated path on a uniform grid, truncated at its stopping index.
struct PathGrid {
  double dt = 0.0;
  std::vector<double> values;  // values[0] == 0, values.size() == stopped_index + 1
  std::size_t stopped_index = 0;
  bool capped = false;  // the rule never fired before the simulation cap

  [[nodiscard]] double terminal() const noexcept { return values[stopped_index]; }
  [[nodiscard]] double stopping_time() const noexcept {
    return static_cast<double>(stopped_index) * dt;
  }
};

struct PathOptions {
  double dt = 1e-4;
  double cap = 64.0;
  /// Detect boundary crossings between grid points with the Brownian-bridge
  /// crossing probability, not only at grid points.
  bool bridge_correction = true;
};

/// Default simulation cap in process time for a law of variance sigma2.
constexpr double default_cap(double sigma2) noexcept { return 64.0 * sigma2; }

PathGrid simulate_path(const StoppingRule& rule, const PathOptions& options, RandomStream& rng);

/// Buffer-reusing form used by the ensemble runner.
void simulate_path(const StoppingRule& rule, const PathOptions& options, RandomStream& rng, PathGrid& out);

/// Terminal value of an interval sequence started at 0, drawn as a chain of
/// two-point exits without simulating a path.
double sample_terminal_exact(std::span<const Interval> steps, RandomStream& rng);

}  // namespace ltime
