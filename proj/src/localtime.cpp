#include "ltime/localtime.hpp"

#include <cstdio>
#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "ltime/embedding.hpp"
#include "ltime/error.hpp"

namespace ltime {

namespace {

std::string format_mean(double mean) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", mean);
  return buf;
}

}  // namespace

namespace {

constexpr double kMeanTolerance = 1e-12;
// Paths per work unit. Fixed, so the merge order never depends on threads.
constexpr std::size_t kBlockPaths = 256;

void require_window(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw Error(Errc::InvalidArgument, "epsilon must be positive");
}

struct BlockResult {
  std::vector<Accumulator> estimates;
  Accumulator stopping_time;
  Accumulator terminal_square;
  std::size_t capped = 0;
};

}  // namespace

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::occupation:
      return "occupation";
    case Method::upcrossing:
      return "upcrossing";
    case Method::exact:
      return "exact";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  if (text == "occupation") return Method::occupation;
  if (text == "upcrossing") return Method::upcrossing;
  if (text == "exact") return Method::exact;
  throw Error(Errc::ParseError, "unknown method '" + std::string(text) + "'");
}

double exact_expected_local_time(const TerminalDistribution& dist, double x) {
  const double mean = moments(dist).mean;
  if (std::abs(mean) > kMeanTolerance) {
    throw Error(Errc::NonZeroMean, "terminal law has mean " + format_mean(mean) + ", expected 0");
  }
  return x >= 0.0 ? 2.0 * expected_positive_part(dist, x) : 2.0 * expected_negative_part(dist, x);
}

double estimate_occupation(const PathGrid& path, double x, double epsilon) {
  require_window(epsilon);
  std::size_t inside = 0;
  for (std::size_t k = 0; k <= path.stopped_index; ++k) {
    if (std::abs(path.values[k] - x) < epsilon) ++inside;
  }
  return path.dt * static_cast<double>(inside) / (2.0 * epsilon);
}

std::size_t count_upcrossings(const PathGrid& path, double lower, double upper) {
  if (!(lower < upper)) throw Error(Errc::InvalidArgument, "upcrossing band needs lower < upper");
  std::size_t count = 0;
  bool armed = false;
  for (std::size_t k = 0; k <= path.stopped_index; ++k) {
    const double v = path.values[k];
    if (v <= lower) {
      armed = true;
    } else if (armed && v >= upper) {
      ++count;
      armed = false;
    }
  }
  return count;
}

double estimate_via_upcrossings(const PathGrid& path, double x, double epsilon, UpcrossingScale scale) {
  require_window(epsilon);
  const auto count = x >= 0.0 ? count_upcrossings(path, x, x + epsilon) : count_upcrossings(path, x - epsilon, x);
  double width = epsilon;
  if (scale == UpcrossingScale::grid_corrected) width += 2.0 * kDiscreteMonitoringShift * std::sqrt(path.dt);
  return 2.0 * width * static_cast<double>(count);
}

void Accumulator::merge(const Accumulator& other) noexcept {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  count_ += other.count_;
}

EnsembleResult run_ensemble(const StoppingRule& rule, std::span<const double> levels, std::span<const Method> methods,
                            const EnsembleOptions& options) {
  require_window(options.epsilon);
  if (options.n_paths == 0) throw Error(Errc::InvalidArgument, "ensemble needs at least one path");
  if (!(options.epsilon > 0.0) || !std::isfinite(options.epsilon)) {
    throw Error(Errc::InvalidArgument, "epsilon must be positive");
  }

  EnsembleResult result;
  result.levels.assign(levels.begin(), levels.end());
  result.methods.assign(methods.begin(), methods.end());
  result.n_paths = options.n_paths;

  const std::size_t cells = levels.size() * methods.size();
  const std::size_t n_blocks = (options.n_paths + kBlockPaths - 1) / kBlockPaths;
  std::vector<BlockResult> blocks(n_blocks);
  std::vector<double> terminals;
  if (options.keep_terminals) terminals.assign(options.n_paths, std::numeric_limits<double>::quiet_NaN());

  std::atomic<std::size_t> next_block{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    PathGrid path;
    try {
      for (std::size_t b = next_block++; b < n_blocks; b = next_block++) {
        auto& block = blocks[b];
        block.estimates.assign(cells, Accumulator{});
        const std::size_t end = std::min(options.n_paths, (b + 1) * kBlockPaths);
        for (std::size_t i = b * kBlockPaths; i < end; ++i) {
          RandomStream rng(options.seed, i);
          simulate_path(rule, options.path, rng, path);
          if (path.capped) {
            ++block.capped;
            continue;
          }
          for (std::size_t l = 0; l < levels.size(); ++l) {
            for (std::size_t m = 0; m < methods.size(); ++m) {
              if (methods[m] == Method::occupation) {
                block.estimates[l * methods.size() + m].add(estimate_occupation(path, levels[l], options.epsilon));
              } else if (methods[m] == Method::upcrossing) {
                block.estimates[l * methods.size() + m].add(
                    estimate_via_upcrossings(path, levels[l], options.epsilon, options.upcrossing_scale));
              }
            }
          }
          block.stopping_time.add(path.stopping_time());
          block.terminal_square.add(path.terminal() * path.terminal());
          if (options.keep_terminals) terminals[i] = path.terminal();
        }
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next_block = n_blocks;
    }
  };

  const unsigned n_threads = std::max(1U, std::min<unsigned>(options.threads, static_cast<unsigned>(n_blocks)));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);

  result.estimates.assign(cells, Accumulator{});
  for (const auto& block : blocks) {
    for (std::size_t c = 0; c < cells; ++c) result.estimates[c].merge(block.estimates[c]);
    result.stopping_time.merge(block.stopping_time);
    result.terminal_square.merge(block.terminal_square);
    result.capped += block.capped;
  }
  if (options.keep_terminals) {
    for (double v : terminals) {
      if (!std::isnan(v)) result.terminals.push_back(v);
    }
  }
  return result;
}

double default_cap_for(const StoppingRule& rule) {
  if (const auto law = terminal_law(rule)) {
    const double var = moments(*law).variance;
    if (var > 0.0) return default_cap(var);
  }
  return 64.0;
}

LocalTimeEstimate mc_expected_local_time(const StoppingRule& rule, double x, std::size_t n_paths, double dt,
                                         double epsilon, Method method, std::uint64_t seed, std::optional<double> cap,
                                         unsigned threads) {
  if (n_paths < 2) throw Error(Errc::InvalidArgument, "need at least 2 paths for a standard error");
  LocalTimeEstimate estimate;
  estimate.x = x;
  estimate.method = method;
  estimate.n_paths = n_paths;

  if (method == Method::exact) {
    const auto law = terminal_law(rule);
    if (!law) throw Error(Errc::InvalidArgument, "rule " + to_string(rule) + " has no closed-form terminal law");
    estimate.value = exact_expected_local_time(*law, x);
    return estimate;
  }

  EnsembleOptions options;
  options.n_paths = n_paths;
  options.path = PathOptions{dt, cap ? *cap : default_cap_for(rule), true};
  options.epsilon = epsilon;
  options.seed = seed;
  options.threads = threads;
  const double levels[] = {x};
  const Method methods[] = {method};
  const auto result = run_ensemble(rule, levels, methods, options);

  if (result.capped == n_paths) {
    throw Error(Errc::AllPathsCapped, "all " + std::to_string(n_paths) + " paths reached the cap");
  }
  const auto& acc = result.at(0, 0);
  estimate.value = acc.mean();
  estimate.std_error = acc.std_error();
  estimate.n_paths = acc.count();
  estimate.epsilon = epsilon;
  estimate.capped_fraction = result.capped_fraction();
  if (result.capped > 0) {
    estimate.warnings.push_back(std::to_string(result.capped) + " capped paths excluded from the estimate");
  }
  return estimate;
}

}  // namespace ltime
