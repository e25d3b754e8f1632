#include "ltime/brownian.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "ltime/error.hpp"

namespace ltime {

namespace {

// exp(-40) ~ 4e-18: crossing probabilities below this are not drawn.
constexpr double kBridgeExponentCutoff = 40.0;

/// Whether the Brownian bridge from `from` to `to` over one step touched a
/// finite side of `band`. P(max of bridge >= u) = exp(-2 (u - from)(u - to) / dt).
std::optional<double> bridge_crossing(const Interval& band, double from, double to, double dt, RandomStream& rng) {
  if (std::isfinite(band.lower)) {
    const double exponent = 2.0 * (from - band.lower) * (to - band.lower) / dt;
    if (exponent < kBridgeExponentCutoff && rng.uniform() < std::exp(-exponent)) return band.lower;
  }
  if (std::isfinite(band.upper)) {
    const double exponent = 2.0 * (band.upper - from) * (band.upper - to) / dt;
    if (exponent < kBridgeExponentCutoff && rng.uniform() < std::exp(-exponent)) return band.upper;
  }
  return std::nullopt;
}

}  // namespace

void simulate_path(const StoppingRule& rule, const PathOptions& options, RandomStream& rng, PathGrid& out) {
  const double dt = options.dt;
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(Errc::InvalidArgument, "dt must be positive");
  if (!(options.cap >= dt)) throw Error(Errc::InvalidArgument, "simulation cap must be at least dt");

  RuleCursor cursor(rule);
  out.dt = dt;
  out.values.clear();
  out.values.push_back(0.0);
  out.capped = false;
  out.stopped_index = 0;
  if (cursor.stopped()) return;

  const double sd = std::sqrt(dt);
  const double bridge_scale = 2.0 / dt;
  const auto max_steps = static_cast<std::size_t>(std::ceil(options.cap / dt - 1e-9));
  // Steps before the time cap fires; the cap is checked only on the slow path.
  const double cap_steps = std::ceil(cursor.time_cap() / dt - 1e-9);
  const std::size_t cap_index =
      cap_steps < static_cast<double>(max_steps) ? static_cast<std::size_t>(cap_steps) : max_steps + 1;
  out.values.reserve(std::min<std::size_t>(max_steps + 1, 1u << 16));
  double position = 0.0;
  Interval band = cursor.band();

  for (std::size_t k = 1;; ++k) {
    if (k > max_steps) {
      out.capped = true;
      break;
    }
    const double next = position + sd * rng.normal();

    // Fast path: strictly inside, far enough from both sides that the bridge
    // cannot have touched them, and short of the time cap.
    if (next > band.lower && next < band.upper && k < cap_index &&
        (!options.bridge_correction ||
         (bridge_scale * (position - band.lower) * (next - band.lower) >= kBridgeExponentCutoff &&
          bridge_scale * (band.upper - position) * (band.upper - next) >= kBridgeExponentCutoff))) {
      position = next;
      out.values.push_back(next);
      continue;
    }

    Decision decision = Continue{};
    if (const auto level = cursor.crossed(next)) {
      decision = cursor.hit(*level);
    } else if (options.bridge_correction) {
      if (const auto level = bridge_crossing(band, position, next, dt, rng)) decision = cursor.hit(*level);
    }
    if (std::holds_alternative<Continue>(decision) && k >= cap_index) decision = StopNow{};

    if (std::holds_alternative<Continue>(decision)) {
      position = next;
      out.values.push_back(next);
    } else if (const auto* d = std::get_if<ContinueFromLevel>(&decision)) {
      position = d->level;
      band = cursor.band();
      out.values.push_back(d->level);
    } else if (const auto* d = std::get_if<StopAtLevel>(&decision)) {
      out.values.push_back(d->level);
      break;
    } else {
      out.values.push_back(next);
      break;
    }
  }
  out.stopped_index = out.values.size() - 1;
}

PathGrid simulate_path(const StoppingRule& rule, const PathOptions& options, RandomStream& rng) {
  PathGrid path;
  simulate_path(rule, options, rng, path);
  return path;
}

double sample_terminal_exact(std::span<const Interval> steps, RandomStream& rng) {
  double position = 0.0;
  for (const auto& step : steps) {
    if (!step.contains_strictly(position)) continue;
    const double p_upper = (position - step.lower) / (step.upper - step.lower);
    position = rng.uniform() < p_upper ? step.upper : step.lower;
  }
  return position;
}

}  // namespace ltime
