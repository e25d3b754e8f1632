#include "ltime/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "grammar.hpp"
#include "ltime/bounds.hpp"
#include "ltime/embedding.hpp"
#include "ltime/error.hpp"

namespace ltime {

namespace {

const std::set<std::string, std::less<>> kKnownKeys{"rule",  "xs",   "paths",   "dt",     "epsilon",
                                                    "methods", "seed", "cap", "threads", "bridge"};

[[noreturn]] void invalid(std::string_view field, const std::string& why) {
  throw Error(Errc::ValidationError, "field '" + std::string(field) + "': " + why);
}

template <class Int>
Int parse_integer(std::string_view text, std::string_view field) {
  text = detail::trim(text);
  Int value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) invalid(field, "not an integer: '" + std::string(text) + "'");
  return value;
}

double bound_for(double x, double sigma) { return sigma > 0.0 ? sharp_bound(x, sigma) : 0.0; }

}  // namespace

// ---------------------------------------------------------------------------

EstimateSummary run_experiment(const ExperimentSpec& spec) {
  if (spec.n_paths < 2) invalid("paths", "need at least 2 paths");
  if (spec.xs.empty()) invalid("xs", "at least one level is required");
  if (!(spec.dt > 0.0)) invalid("dt", "must be positive");
  const double epsilon = spec.effective_epsilon();
  if (!(epsilon > 0.0)) invalid("epsilon", "must be positive");
  if (spec.cap && !(*spec.cap > 0.0)) invalid("cap", "must be positive");
  if (spec.methods.empty()) invalid("methods", "at least one method is required");

  std::vector<double> xs = spec.xs;
  std::sort(xs.begin(), xs.end());

  const auto law = terminal_law(spec.rule);
  std::vector<Method> mc_methods;
  for (auto m : spec.methods) {
    if (m != Method::exact) mc_methods.push_back(m);
  }
  if (!law && mc_methods.size() != spec.methods.size()) {
    invalid("methods", "'exact' needs a rule with a closed-form terminal law");
  }

  EstimateSummary summary;
  summary.dt = spec.dt;
  summary.epsilon = epsilon;
  summary.seed = spec.seed;
  summary.n_paths = spec.n_paths;

  std::optional<EnsembleResult> ensemble;
  if (!mc_methods.empty() || !law) {
    EnsembleOptions options;
    options.n_paths = spec.n_paths;
    options.path = PathOptions{spec.dt, spec.cap ? *spec.cap : default_cap_for(spec.rule), spec.bridge_correction};
    options.epsilon = epsilon;
    options.seed = spec.seed;
    options.threads = spec.threads;
    options.keep_terminals = spec.keep_terminals;
    ensemble = run_ensemble(spec.rule, xs, mc_methods, options);
    if (ensemble->capped == spec.n_paths) {
      throw Error(Errc::AllPathsCapped, "all " + std::to_string(spec.n_paths) + " paths reached the cap");
    }
    summary.capped_fraction = ensemble->capped_fraction();
    summary.stopping_time = ensemble->stopping_time;
    summary.terminals = std::move(ensemble->terminals);
    if (ensemble->capped > 0) {
      summary.warnings.push_back(std::to_string(ensemble->capped) + " of " + std::to_string(spec.n_paths) +
                                 " paths reached the cap and were excluded");
    }
  }

  const double sigma = law ? std::sqrt(moments(*law).variance) : std::sqrt(ensemble->terminal_square.mean());

  for (std::size_t l = 0; l < xs.size(); ++l) {
    SummaryRow row{xs[l], sigma, bound_for(xs[l], sigma), std::nullopt, {}};
    if (law) row.exact = exact_expected_local_time(*law, xs[l]);
    std::size_t mc_index = 0;
    for (auto m : spec.methods) {
      if (m == Method::exact) {
        row.estimates.push_back({m, *row.exact, 0.0, spec.n_paths, 0.0});
      } else {
        const auto& acc = ensemble->at(l, mc_index++);
        row.estimates.push_back({m, acc.mean(), acc.std_error(), acc.count(), ensemble->capped_fraction()});
      }
    }
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

SweepResult run_sweep(double sigma, std::span<const double> xs, std::size_t n_paths, double dt, double epsilon,
                      std::uint64_t seed, unsigned threads) {
  if (!(sigma > 0.0)) invalid("sigma", "must be positive");
  if (xs.empty()) invalid("xs", "at least one level is required");
  std::vector<double> grid(xs.begin(), xs.end());
  std::sort(grid.begin(), grid.end());

  SweepResult sweep{sigma, {}, {}};
  for (double x : grid) {
    ExperimentSpec spec;
    spec.rule = optimal_rule(x, sigma);
    spec.xs = {x};
    spec.n_paths = n_paths;
    spec.dt = dt;
    spec.epsilon = epsilon;
    spec.seed = seed;
    spec.threads = threads;
    auto part = run_experiment(spec);
    auto& row = part.rows.front();
    row.sigma = sigma;
    row.bound = sharp_bound(x, sigma);
    sweep.ratios.push_back(row.estimates.front().estimate / row.bound);
    if (sweep.summary.rows.empty()) {
      sweep.summary.dt = part.dt;
      sweep.summary.epsilon = part.epsilon;
      sweep.summary.seed = part.seed;
      sweep.summary.n_paths = part.n_paths;
    }
    sweep.summary.capped_fraction = std::max(sweep.summary.capped_fraction, part.capped_fraction);
    sweep.summary.stopping_time.merge(part.stopping_time);
    for (auto& w : part.warnings) sweep.summary.warnings.push_back("x=" + format_short(x) + ": " + w);
    sweep.summary.rows.push_back(std::move(row));
  }
  return sweep;
}

// ---------------------------------------------------------------------------

SettingMap parse_settings(std::string_view text) {
  SettingMap out;
  std::size_t line_no = 0;
  for (auto line : detail::split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw Error(Errc::ParseError, where + ": expected key=value");
    const auto key = detail::trim(line.substr(0, eq));
    if (!kKnownKeys.contains(key)) throw Error(Errc::ParseError, where + ": unknown field '" + std::string(key) + "'");
    if (out.contains(key)) throw Error(Errc::ParseError, where + ": field '" + std::string(key) + "' repeated");
    out.emplace(std::string(key), std::string(detail::trim(line.substr(eq + 1))));
  }
  return out;
}

ExperimentSpec build_spec(const SettingMap& settings) {
  ExperimentSpec spec;
  auto field = [&](std::string_view key) -> const std::string* {
    const auto it = settings.find(key);
    return it == settings.end() ? nullptr : &it->second;
  };
  // Grammar and domain errors inside a field are reported against that field.
  auto guarded = [](std::string_view key, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (e.code() == Errc::ValidationError) throw;
      invalid(key, e.what());
    }
  };

  for (const auto& [key, value] : settings) {
    if (!kKnownKeys.contains(key)) invalid(key, "unknown field");
  }

  const auto* rule = field("rule");
  if (!rule) invalid("rule", "missing");
  guarded("rule", [&] { spec.rule = parse_rule(*rule); });

  const auto* xs = field("xs");
  if (!xs) invalid("xs", "missing");
  guarded("xs", [&] { spec.xs = parse_levels(*xs); });
  if (spec.xs.empty()) invalid("xs", "at least one level is required");

  if (const auto* v = field("paths")) {
    spec.n_paths = parse_integer<std::size_t>(*v, "paths");
    if (spec.n_paths < 2) invalid("paths", "need at least 2 paths");
  }
  if (const auto* v = field("dt")) {
    guarded("dt", [&] { spec.dt = detail::parse_real(*v, "dt"); });
    if (!(spec.dt > 0.0)) invalid("dt", "must be positive");
  }
  if (const auto* v = field("epsilon")) {
    guarded("epsilon", [&] { spec.epsilon = detail::parse_real(*v, "epsilon"); });
    if (!(*spec.epsilon > 0.0)) invalid("epsilon", "must be positive");
  }
  if (const auto* v = field("methods")) {
    spec.methods.clear();
    guarded("methods", [&] {
      for (auto item : detail::split(*v, ',')) spec.methods.push_back(parse_method(item));
    });
  }
  if (const auto* v = field("seed")) spec.seed = parse_integer<std::uint64_t>(*v, "seed");
  if (const auto* v = field("cap")) {
    guarded("cap", [&] { spec.cap = detail::parse_real(*v, "cap"); });
    if (!(*spec.cap >= spec.dt)) invalid("cap", "must be at least dt");
  }
  if (const auto* v = field("threads")) {
    spec.threads = parse_integer<unsigned>(*v, "threads");
    if (spec.threads == 0) invalid("threads", "must be at least 1");
  }
  if (const auto* v = field("bridge")) {
    if (*v == "true" || *v == "1") {
      spec.bridge_correction = true;
    } else if (*v == "false" || *v == "0") {
      spec.bridge_correction = false;
    } else {
      invalid("bridge", "expected true or false");
    }
  }
  return spec;
}

ExperimentSpec parse_spec(std::string_view text) { return build_spec(parse_settings(text)); }

std::vector<double> parse_levels(std::string_view text) {
  text = detail::trim(text);
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = detail::split(text, ':');
    if (parts.size() != 3) throw Error(Errc::ParseError, "range '" + std::string(text) + "': expected start:stop:step");
    const double start = detail::parse_real(parts[0], "start");
    const double stop = detail::parse_real(parts[1], "stop");
    const double step = detail::parse_real(parts[2], "step");
    if (!(step > 0.0) || stop < start) throw Error(Errc::ParseError, "range '" + std::string(text) + "': empty or bad step");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  for (auto item : detail::split(text, ',')) out.push_back(detail::parse_real(item, "xs"));
  return out;
}

// ---------------------------------------------------------------------------

std::string format_full(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

std::string format_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_csv(std::ostream& os, const EstimateSummary& summary) {
  os << kCsvHeader << '\n';
  for (const auto& row : summary.rows) {
    for (const auto& e : row.estimates) {
      const bool mc = e.method != Method::exact;
      os << format_full(row.x) << ',' << format_full(row.sigma) << ',' << format_full(row.bound) << ','
         << (row.exact ? format_full(*row.exact) : std::string()) << ',' << to_string(e.method) << ','
         << format_full(e.estimate) << ',' << format_full(e.std_error) << ',' << e.n_paths << ','
         << format_full(summary.dt) << ',' << (mc ? format_full(summary.epsilon) : std::string()) << ','
         << format_full(e.capped_fraction) << ',' << summary.seed << '\n';
    }
  }
}

nlohmann::json to_json(const EstimateSummary& summary) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& row : summary.rows) {
    for (const auto& e : row.estimates) {
      const bool mc = e.method != Method::exact;
      records.push_back({
          {"x", row.x},
          {"sigma", row.sigma},
          {"bound", row.bound},
          {"exact", row.exact ? nlohmann::json(*row.exact) : nlohmann::json(nullptr)},
          {"method", std::string(to_string(e.method))},
          {"estimate", e.estimate},
          {"std_error", e.std_error},
          {"n_paths", e.n_paths},
          {"dt", summary.dt},
          {"epsilon", mc ? nlohmann::json(summary.epsilon) : nlohmann::json(nullptr)},
          {"capped_fraction", e.capped_fraction},
          {"seed", summary.seed},
      });
    }
  }
  return {
      {"records", std::move(records)},
      {"mean_stopping_time", summary.stopping_time.mean()},
      {"stopping_time_std_error", summary.stopping_time.std_error()},
      {"capped_fraction", summary.capped_fraction},
      {"warnings", summary.warnings},
  };
}

}  // namespace ltime
