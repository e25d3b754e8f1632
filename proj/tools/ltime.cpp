#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <nlohmann/json.hpp>

#include "ltime/acceptance.hpp"
#include "ltime/bounds.hpp"
#include "ltime/brownian.hpp"
#include "ltime/distributions.hpp"
#include "ltime/embedding.hpp"
#include "ltime/error.hpp"
#include "ltime/harness.hpp"
#include "ltime/localtime.hpp"
#include "ltime/random.hpp"
#include "ltime/stopping.hpp"

namespace {

using nlohmann::json;
using namespace ltime;

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

/// A user-facing error attributed to a flag.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void bad_flag(const std::string& flag, const std::string& message) {
  throw UsageError(flag + ": " + message);
}

/// Runs fn and re-labels library errors with the flag whose value caused them.
template <class Fn>
auto for_flag(const std::string& flag, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    bad_flag(flag, e.what());
  }
}

struct CommonOptions {
  bool json = false;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_flag("--json", common.json, "Emit a JSON document instead of text");
  cmd->add_option("--out", common.out, "Write the output to this file instead of stdout");
}

void emit(const CommonOptions& common, const std::string& text) {
  if (common.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(common.out, std::ios::binary);
  if (!file) bad_flag("--out", "cannot open '" + common.out + "' for writing");
  file << text;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

std::uint64_t parse_seed(const std::string& text, const std::string& source) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) bad_flag(source, "expected an unsigned 64-bit integer, got '" + text + "'");
  return value;
}

/// --seed wins, then the LOCALTIME_SEED environment variable, then 0.
std::uint64_t resolve_seed(const std::optional<std::string>& flag) {
  if (flag) return parse_seed(*flag, "--seed");
  if (const char* env = std::getenv("LOCALTIME_SEED"); env && *env) return parse_seed(env, "LOCALTIME_SEED");
  return 0;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

// ---------------------------------------------------------------------------
// bound

struct BoundArgs {
  CommonOptions common;
  double x = 0.0;
  double sigma = 0.0;
  std::optional<double> b;
};

int cmd_bound(const BoundArgs& args) {
  if (!(args.sigma > 0.0)) bad_flag("--sigma", "must be positive");
  const double bound = sharp_bound(args.x, args.sigma);
  std::optional<double> up;
  if (args.b) up = for_flag("--b", [&] { return upcrossing_bound(args.x, *args.b, args.sigma); });

  if (args.common.json) {
    json doc{{"x", args.x}, {"sigma", args.sigma}, {"bound", bound}};
    if (up) {
      doc["b"] = *args.b;
      doc["upcrossing_bound"] = *up;
    }
    emit(args.common, dump(doc));
  } else if (up) {
    emit(args.common, "bound " + format_short(bound) + "\nupcrossing_bound " + format_short(*up) + "\n");
  } else {
    emit(args.common, format_short(bound) + "\n");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// exact

struct ExactArgs {
  CommonOptions common;
  std::string dist;
  double x = 0.0;
};

int cmd_exact(const ExactArgs& args) {
  const auto dist = for_flag("--dist", [&] { return parse_distribution(args.dist); });
  const double value = for_flag("--dist", [&] { return exact_expected_local_time(dist, args.x); });
  if (args.common.json) {
    const auto m = moments(dist);
    emit(args.common, dump(json{{"dist", to_string(dist)},
                                {"x", args.x},
                                {"exact", value},
                                {"sigma", std::sqrt(m.variance)},
                                {"bound", sharp_bound(args.x, std::sqrt(m.variance))}}));
  } else {
    emit(args.common, format_short(value) + "\n");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  CommonOptions common;
  std::string config;
  std::optional<std::string> rule, xs, methods, seed;
  std::optional<std::size_t> paths;
  std::optional<double> dt, epsilon, cap;
  std::optional<unsigned> threads;
  bool no_bridge = false;
  std::string dump_path;
};

std::string read_file(const std::string& path, const std::string& flag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad_flag(flag, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentSpec simulate_spec(const SimulateArgs& args) {
  SettingMap settings;
  if (!args.config.empty()) {
    const auto text = read_file(args.config, "--config");
    settings = for_flag("--config", [&] { return parse_settings(text); });
  }
  // Flags override the file.
  auto set = [&](const char* key, const auto& value) {
    if (value) {
      std::ostringstream ss;
      ss.precision(17);
      ss << *value;
      settings[key] = ss.str();
    }
  };
  set("rule", args.rule);
  set("xs", args.xs);
  set("methods", args.methods);
  set("paths", args.paths);
  set("dt", args.dt);
  set("epsilon", args.epsilon);
  set("cap", args.cap);
  set("threads", args.threads);
  if (args.no_bridge) settings["bridge"] = "false";
  if (args.seed || !settings.contains("seed")) settings["seed"] = std::to_string(resolve_seed(args.seed));

  try {
    return build_spec(settings);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

void dump_first_path(const ExperimentSpec& spec, const std::string& file) {
  PathOptions options;
  options.dt = spec.dt;
  options.cap = spec.cap ? *spec.cap : default_cap_for(spec.rule);
  options.bridge_correction = spec.bridge_correction;
  RandomStream rng(spec.seed, 0);
  const auto path = simulate_path(spec.rule, options, rng);
  std::ofstream out(file, std::ios::binary);
  if (!out) bad_flag("--dump-path", "cannot open '" + file + "' for writing");
  out << "t,value\n";
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    out << format_full(static_cast<double>(i) * path.dt) << ',' << format_full(path.values[i]) << '\n';
  }
}

int cmd_simulate(const SimulateArgs& args) {
  const auto spec = simulate_spec(args);
  if (!args.dump_path.empty()) dump_first_path(spec, args.dump_path);
  const auto summary = run_experiment(spec);
  print_warnings(summary.warnings);
  if (args.common.json) {
    auto doc = to_json(summary);
    doc["rule"] = to_string(spec.rule);
    emit(args.common, dump(doc));
  } else {
    std::ostringstream os;
    write_csv(os, summary);
    emit(args.common, os.str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  CommonOptions common;
  double sigma = 0.0;
  std::string xs;
  std::size_t paths = 50000;
  double dt = 1e-4;
  std::optional<double> epsilon;
  std::optional<std::string> seed;
  unsigned threads = 1;
  std::string curve;
};

std::string curve_path(const SweepArgs& args) {
  if (!args.curve.empty()) return args.curve;
  if (args.common.out.empty()) return "bound_curve.csv";
  std::filesystem::path out(args.common.out);
  return (out.parent_path() / (out.stem().string() + "_curve.csv")).string();
}

int cmd_sweep(const SweepArgs& args) {
  if (!(args.sigma > 0.0)) bad_flag("--sigma", "must be positive");
  if (args.paths < 2) bad_flag("--paths", "need at least 2 paths");
  if (!(args.dt > 0.0)) bad_flag("--dt", "must be positive");
  if (args.epsilon && !(*args.epsilon > 0.0)) bad_flag("--epsilon", "must be positive");
  const auto xs = for_flag("--xs", [&] { return parse_levels(args.xs); });
  const double epsilon = args.epsilon ? *args.epsilon : default_epsilon(args.dt);
  const auto sweep = run_sweep(args.sigma, xs, args.paths, args.dt, epsilon, resolve_seed(args.seed), args.threads);
  print_warnings(sweep.summary.warnings);

  const auto curve = curve_path(args);
  {
    std::ofstream out(curve, std::ios::binary);
    if (!out) bad_flag("--curve", "cannot open '" + curve + "' for writing");
    out << "x,bound\n";
    for (const auto& row : sweep.summary.rows) out << format_full(row.x) << ',' << format_full(row.bound) << '\n';
  }

  if (args.common.json) {
    auto doc = to_json(sweep.summary);
    doc["sigma"] = sweep.sigma;
    doc["ratios"] = sweep.ratios;
    doc["curve_file"] = curve;
    emit(args.common, dump(doc));
  } else {
    std::ostringstream os;
    write_csv(os, sweep.summary);
    emit(args.common, os.str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// embed

struct EmbedArgs {
  CommonOptions common;
  std::string target;
  bool verify = false;
  std::size_t simulate = 0;
  std::optional<std::string> seed;
  double dt = 1e-4;
  unsigned threads = 1;
  bool no_bridge = false;
};

std::string human_plan(const std::vector<Interval>& steps) {
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) out += ';';
    out += '(' + format_short(steps[i].lower) + ',' + format_short(steps[i].upper) + ')';
  }
  return out.empty() ? "(empty)" : out;
}

int cmd_embed(const EmbedArgs& args) {
  if (!(args.dt > 0.0)) bad_flag("--dt", "must be positive");
  const auto target = for_flag("--target", [&] { return parse_distribution(args.target); });
  if (!target.has_finite_support()) bad_flag("--target", "embedding needs a finite-support law");
  const auto plan = for_flag("--target", [&] { return chacon_walsh_plan(target); });
  const auto report = verify_plan(plan);

  json doc{{"target", to_string(target)},
           {"plan", "plan:" + format_plan(plan.steps)},
           {"steps", json::array()},
           {"exact_match", report.exact_match},
           {"exact_arithmetic", plan.exact_arithmetic}};
  for (const auto& s : plan.steps) doc["steps"].push_back({s.lower, s.upper});
  std::ostringstream text;
  text << "plan " << human_plan(plan.steps) << '\n';
  text << "exact_match " << (report.exact_match ? "yes" : "no") << '\n';

  if (args.verify) {
    doc["max_prob_gap"] = report.max_prob_gap;
    doc["potential_gap"] = report.potential_gap;
    doc["convex_order_monotone"] = report.convex_order_monotone;
    doc["step_variances"] = report.step_variances;
    text << "max_prob_gap " << format_short(report.max_prob_gap) << '\n';
    text << "potential_gap " << format_short(report.potential_gap) << '\n';
    text << "convex_order_monotone " << (report.convex_order_monotone ? "yes" : "no") << '\n';
    text << "step_variances";
    for (double v : report.step_variances) text << ' ' << format_short(v);
    text << '\n';
  }

  bool ok = report.exact_match;
  if (args.simulate > 0) {
    if (args.simulate < 2) bad_flag("--simulate", "need at least 2 paths");
    ExperimentSpec spec;
    spec.rule = StoppingRule::plan(plan.steps);
    spec.xs = {0.0};
    spec.n_paths = args.simulate;
    spec.dt = args.dt;
    spec.seed = resolve_seed(args.seed);
    spec.threads = args.threads;
    spec.bridge_correction = !args.no_bridge;
    spec.keep_terminals = true;
    const auto summary = run_experiment(spec);
    print_warnings(summary.warnings);

    const auto& atoms = plan.target.atoms();
    std::vector<double> counts(atoms.size(), 0.0);
    for (double v : summary.terminals) {
      for (std::size_t k = 0; k < atoms.size(); ++k) {
        if (std::abs(v - atoms[k].value) <= 1e-9) counts[k] += 1.0;
      }
    }
    const double total = static_cast<double>(summary.terminals.size());
    double stat = 0.0;
    json law = json::array();
    text << "value target empirical\n";
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const double expected = total * atoms[k].prob;
      stat += (counts[k] - expected) * (counts[k] - expected) / expected;
      law.push_back({{"value", atoms[k].value}, {"target", atoms[k].prob}, {"empirical", counts[k] / total}});
      text << format_short(atoms[k].value) << ' ' << format_short(atoms[k].prob) << ' '
           << format_short(counts[k] / total) << '\n';
    }
    double p_value = 1.0;
    if (atoms.size() > 1) {
      p_value = boost::math::cdf(boost::math::complement(
          boost::math::chi_squared(static_cast<double>(atoms.size() - 1)), stat));
    }
    const auto& row = summary.rows.front();
    const auto& est = row.estimates.front();
    doc["simulation"] = {{"paths", args.simulate},     {"seed", spec.seed},
                         {"law", law},                 {"chi_square", stat},
                         {"p_value", p_value},         {"local_time_at_0", est.estimate},
                         {"std_error", est.std_error}, {"exact_at_0", row.exact ? json(*row.exact) : json()}};
    text << "chi_square " << format_short(stat) << " p " << format_short(p_value) << '\n';
    text << "local_time_at_0 " << format_short(est.estimate) << " se " << format_short(est.std_error);
    if (row.exact) text << " exact " << format_short(*row.exact);
    text << '\n';
  }

  emit(args.common, args.common.json ? dump(doc) : text.str());
  return ok ? kExitOk : kExitFailed;
}

// ---------------------------------------------------------------------------
// upcross

struct UpcrossArgs {
  CommonOptions common;
  std::string rule;
  double x = 0.0;
  double b = 0.0;
  std::optional<double> sigma;
  std::size_t paths = 20000;
  double dt = 1e-4;
  std::optional<std::string> seed;
  bool no_bridge = false;
};

int cmd_upcross(const UpcrossArgs& args) {
  const auto rule = for_flag("--rule", [&] { return parse_rule(args.rule); });
  if (args.paths < 2) bad_flag("--paths", "need at least 2 paths");
  if (!(args.dt > 0.0)) bad_flag("--dt", "must be positive");
  if (!(args.b > args.x)) bad_flag("--b", "must exceed --x");

  double sigma = 0.0;
  if (args.sigma) {
    sigma = *args.sigma;
    if (!(sigma > 0.0)) bad_flag("--sigma", "must be positive");
  } else if (const auto law = terminal_law(rule)) {
    sigma = std::sqrt(moments(*law).variance);
  } else {
    bad_flag("--sigma", "required for rules without a closed-form terminal law");
  }
  const double bound = for_flag("--b", [&] { return upcrossing_bound(args.x, args.b, sigma); });

  PathOptions options;
  options.dt = args.dt;
  options.cap = default_cap_for(rule);
  options.bridge_correction = !args.no_bridge;
  const auto seed = resolve_seed(args.seed);
  Accumulator counts;
  std::size_t capped = 0;
  PathGrid path;
  for (std::size_t i = 0; i < args.paths; ++i) {
    RandomStream rng(seed, i);
    simulate_path(rule, options, rng, path);
    if (path.capped) {
      ++capped;
      continue;
    }
    counts.add(static_cast<double>(count_upcrossings(path, args.x, args.b)));
  }
  if (counts.count() == 0) throw Error(Errc::AllPathsCapped, "every path hit the time cap");
  const double capped_fraction = static_cast<double>(capped) / static_cast<double>(args.paths);

  if (args.common.json) {
    emit(args.common, dump(json{{"rule", to_string(rule)},
                                {"x", args.x},
                                {"b", args.b},
                                {"sigma", sigma},
                                {"mean_upcrossings", counts.mean()},
                                {"std_error", counts.std_error()},
                                {"upcrossing_bound", bound},
                                {"n_paths", args.paths},
                                {"dt", args.dt},
                                {"capped_fraction", capped_fraction},
                                {"seed", seed}}));
  } else {
    std::ostringstream text;
    text << "mean_upcrossings " << format_short(counts.mean()) << " se " << format_short(counts.std_error()) << '\n'
         << "upcrossing_bound " << format_short(bound) << '\n';
    if (capped) text << "capped_fraction " << format_short(capped_fraction) << '\n';
    emit(args.common, text.str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  CommonOptions common;
  bool quick = false;
  unsigned threads = 1;
  std::optional<std::string> seed;
};

int cmd_verify(const VerifyArgs& args) {
  AcceptanceOptions options;
  options.quick = args.quick;
  options.threads = args.threads;
  if (args.seed) options.seed = parse_seed(*args.seed, "--seed");
  // Stream progress to the terminal only for human output on stdout.
  if (!args.common.json && args.common.out.empty()) {
    options.on_result = [](const CriterionResult& r) {
      std::cout << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": " << r.detail << " ("
                << format_short(r.seconds) << " s)" << std::endl;
    };
  }
  const auto results = run_acceptance(options);
  std::size_t failed = 0;
  json doc = json::array();
  std::ostringstream text;
  for (const auto& r : results) {
    failed += !r.passed;
    doc.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"seconds", r.seconds}});
    text << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": " << r.detail << " ("
         << format_short(r.seconds) << " s)\n";
  }
  const std::string verdict = std::to_string(results.size() - failed) + "/" + std::to_string(results.size()) +
                              " criteria passed\n";
  if (args.common.json) {
    emit(args.common, dump(json{{"criteria", doc}, {"passed", failed == 0}}));
  } else if (args.common.out.empty()) {
    std::cout << verdict;
  } else {
    emit(args.common, text.str() + verdict);
  }
  return failed == 0 ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local time of stopped Brownian motion: bounds, exact values, simulation and embeddings"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ltime 1.0.0");

  BoundArgs bound;
  auto* c_bound = app.add_subcommand("bound", "Sharp upper bound on E[L_x(tau)] given E[tau]");
  add_common(c_bound, bound.common);
  c_bound->add_option("--x", bound.x, "Level")->required();
  c_bound->add_option("--sigma", bound.sigma, "sqrt(E[tau])")->required();
  c_bound->add_option("--b", bound.b, "Upper level for the upcrossing bound (needs b - x <= sigma)");

  ExactArgs exact;
  auto* c_exact = app.add_subcommand("exact", "Exact E[L_x(tau)] from the terminal law");
  add_common(c_exact, exact.common);
  c_exact->add_option("--dist", exact.dist, "Terminal law, e.g. finite:-1=0.5,1=0.5")->required();
  c_exact->add_option("--x", exact.x, "Level")->required();

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo experiment; writes the CSV report");
  add_common(c_sim, sim.common);
  c_sim->add_option("--config", sim.config, "key=value file; flags override its values");
  c_sim->add_option("--rule", sim.rule, "Stopping rule, e.g. firstexit:a=1,b=1");
  c_sim->add_option("--xs", sim.xs, "Levels: a,b,c or start:stop:step");
  c_sim->add_option("--methods", sim.methods, "Comma list of occupation, upcrossing, exact");
  c_sim->add_option("--paths", sim.paths, "Number of paths");
  c_sim->add_option("--dt", sim.dt, "Time step");
  c_sim->add_option("--epsilon", sim.epsilon, "Estimator window");
  c_sim->add_option("--cap", sim.cap, "Process-time cap per path");
  c_sim->add_option("--seed", sim.seed, "Seed (default: $LOCALTIME_SEED or 0)");
  c_sim->add_option("--threads", sim.threads, "Worker threads; does not change results");
  c_sim->add_flag("--no-bridge", sim.no_bridge, "Detect exits at grid points only");
  c_sim->add_option("--dump-path", sim.dump_path, "Write path 0 as t,value CSV");

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Trace the bound curve with the optimal rule at each level");
  add_common(c_sweep, sweep.common);
  c_sweep->add_option("--sigma", sweep.sigma, "sqrt(E[tau])")->required();
  c_sweep->add_option("--xs", sweep.xs, "Levels: a,b,c or start:stop:step")->required();
  c_sweep->add_option("--paths", sweep.paths, "Paths per level");
  c_sweep->add_option("--dt", sweep.dt, "Time step");
  c_sweep->add_option("--epsilon", sweep.epsilon, "Estimator window");
  c_sweep->add_option("--seed", sweep.seed, "Seed (default: $LOCALTIME_SEED or 0)");
  c_sweep->add_option("--threads", sweep.threads, "Worker threads; does not change results")->check(CLI::PositiveNumber);
  c_sweep->add_option("--curve", sweep.curve, "x,bound curve file (default: <out>_curve.csv or bound_curve.csv)");

  EmbedArgs embed;
  auto* c_embed = app.add_subcommand("embed", "Chacon-Walsh interval plan for a finite target law");
  add_common(c_embed, embed.common);
  c_embed->add_option("--target", embed.target, "Target law, finite:v=p,...")->required();
  c_embed->add_flag("--verify", embed.verify, "Print the full verification report");
  c_embed->add_option("--simulate", embed.simulate, "Simulate the plan with this many paths");
  c_embed->add_option("--seed", embed.seed, "Seed (default: $LOCALTIME_SEED or 0)");
  c_embed->add_option("--dt", embed.dt, "Time step for --simulate");
  c_embed->add_option("--threads", embed.threads, "Worker threads; does not change results")->check(CLI::PositiveNumber);
  c_embed->add_flag("--no-bridge", embed.no_bridge, "Detect exits at grid points only");

  UpcrossArgs up;
  auto* c_up = app.add_subcommand("upcross", "Mean upcrossing count of [x, b] against its bound");
  add_common(c_up, up.common);
  c_up->add_option("--rule", up.rule, "Stopping rule")->required();
  c_up->add_option("--x", up.x, "Lower level")->required();
  c_up->add_option("--b", up.b, "Upper level")->required();
  c_up->add_option("--sigma", up.sigma, "sqrt(E[tau]) (default: from the rule's terminal law)");
  c_up->add_option("--paths", up.paths, "Number of paths");
  c_up->add_option("--dt", up.dt, "Time step");
  c_up->add_option("--seed", up.seed, "Seed (default: $LOCALTIME_SEED or 0)");
  c_up->add_flag("--no-bridge", up.no_bridge, "Detect exits at grid points only");

  VerifyArgs verify;
  auto* c_verify = app.add_subcommand("verify", "Run the acceptance suite");
  add_common(c_verify, verify.common);
  c_verify->add_flag("--quick", verify.quick, "Monte Carlo criteria at 5000 paths");
  c_verify->add_option("--threads", verify.threads, "Worker threads")->check(CLI::PositiveNumber);
  c_verify->add_option("--seed", verify.seed, "Base seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (c_bound->parsed()) return cmd_bound(bound);
    if (c_exact->parsed()) return cmd_exact(exact);
    if (c_sim->parsed()) return cmd_simulate(sim);
    if (c_sweep->parsed()) return cmd_sweep(sweep);
    if (c_embed->parsed()) return cmd_embed(embed);
    if (c_up->parsed()) return cmd_upcross(up);
    if (c_verify->parsed()) return cmd_verify(verify);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  return kExitUsage;
}
