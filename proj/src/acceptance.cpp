#include "ltime/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "ltime/bounds.hpp"
#include "ltime/distributions.hpp"
#include "ltime/embedding.hpp"
#include "ltime/harness.hpp"
#include "ltime/localtime.hpp"
#include "ltime/stopping.hpp"

namespace ltime {

namespace {

constexpr double kDt = 1e-4;
constexpr double kEpsilon = 0.02;
constexpr double kOccupationAllowance = 0.03;
constexpr double kUpcrossingAllowance = 0.05;

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!passed) detail << "; ";
      passed = false;
      detail << "FAILED " << what;
    }
  }
};

/// Mean-zero finite-support law with n in [2, max_points] atoms and variance
/// drawn from (0.05, max_variance].
FiniteSupport random_centered_law(std::mt19937_64& gen, std::size_t max_points, double max_variance) {
  std::uniform_int_distribution<std::size_t> size(2, max_points);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::exponential_distribution<double> weight(1.0);
  std::uniform_real_distribution<double> variance(0.05, max_variance);

  const std::size_t n = size(gen);
  std::vector<double> values;
  while (values.size() < n) {
    const double v = unit(gen);
    if (std::none_of(values.begin(), values.end(), [v](double w) { return std::abs(v - w) < 1e-3; })) values.push_back(v);
  }
  std::vector<double> probs(n);
  double total = 0.0;
  for (auto& p : probs) total += (p = weight(gen) + 1e-3);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += (probs[i] /= total) * values[i];
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) var += probs[i] * (values[i] - mean) * (values[i] - mean);
  const double scale = std::sqrt(variance(gen) / var);
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < n; ++i) atoms.push_back({(values[i] - mean) * scale, probs[i]});
  return FiniteSupport::from_atoms(std::move(atoms));
}

/// Mean-zero law on a decimal grid, so the exact-rational embedding path is
/// exercised.
FiniteSupport random_decimal_law(std::mt19937_64& gen, std::size_t max_points) {
  std::uniform_int_distribution<std::size_t> size(2, max_points);
  std::uniform_int_distribution<int> value(-20, 20);
  std::uniform_int_distribution<int> weight(1, 9);
  while (true) {
    const std::size_t n = size(gen);
    std::vector<int> values;
    while (values.size() < n) {
      const int v = value(gen);
      if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
    }
    std::vector<int> weights(n);
    int total = 0;
    for (auto& w : weights) total += (w = weight(gen));
    // Shift by the mean so the law is centred; integer arithmetic keeps it exact
    // up to the final division.
    long long num = 0;
    for (std::size_t i = 0; i < n; ++i) num += static_cast<long long>(weights[i]) * values[i];
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = static_cast<double>(static_cast<long long>(values[i]) * total - num) / (4.0 * total);
      atoms.push_back({v, static_cast<double>(weights[i]) / total});
    }
    auto law = FiniteSupport::from_atoms(std::move(atoms));
    if (std::abs(moments(law).mean) <= 1e-14) return law;
  }
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

EstimateSummary run_mc(const StoppingRule& rule, std::vector<double> xs, std::vector<Method> methods, std::size_t n,
                       std::uint64_t seed, unsigned threads, bool keep_terminals = false) {
  ExperimentSpec spec;
  spec.rule = rule;
  spec.xs = std::move(xs);
  spec.n_paths = n;
  spec.dt = kDt;
  spec.epsilon = kEpsilon;
  spec.methods = std::move(methods);
  spec.seed = seed;
  spec.threads = threads;
  spec.keep_terminals = keep_terminals;
  return run_experiment(spec);
}

// ---------------------------------------------------------------------------

Outcome exact_formula_suite() {
  Outcome out;
  double worst = 0.0;
  int points = 0;
  const double as[] = {0.5, 1.0, 2.0, 3.5, 5.0};
  const double bs[] = {0.25, 1.0, 1.5, 4.0, 7.0};
  for (double a : as) {
    for (double b : bs) {
      for (double x : linspace(-a, b, 4)) {
        const double got = exact_expected_local_time(ExitLaw{a, b}, x);
        const double want = x >= 0.0 ? 2.0 * a * (b - x) / (a + b) : 2.0 * b * (a + x) / (a + b);
        worst = std::max(worst, std::abs(got - want));
        ++points;
      }
      const double harmonic = 2.0 / (1.0 / a + 1.0 / b);
      out.require(std::abs(exact_expected_local_time(ExitLaw{a, b}, 0.0) - harmonic) <= 1e-12, "harmonic mean");
    }
  }
  out.require(points == 100, "grid size");
  out.require(worst <= 1e-12, "first-exit grid");
  out.detail << "first-exit grid " << points << " pts, max err " << worst;

  for (double sigma : {0.5, 1.0, 2.0, 3.0}) {
    const double normal = exact_expected_local_time(NormalLaw{sigma}, 0.0);
    const double expo = exact_expected_local_time(ShiftedExponential{sigma}, 0.0);
    out.require(std::abs(normal - sigma * std::sqrt(2.0 / std::numbers::pi)) <= 1e-12, "normal at 0");
    out.require(std::abs(expo - sigma * 2.0 / std::numbers::e) <= 1e-12, "exponential at 0");
  }

  double worst_two_point = 0.0;
  int pairs = 0;
  for (double x : linspace(0.0, 4.0, 10)) {
    for (double sigma : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      const double got = exact_expected_local_time(TwoPointOptimal{x, sigma}, x);
      worst_two_point = std::max(worst_two_point, std::abs(got - (std::sqrt(sigma * sigma + x * x) - x)));
      ++pairs;
    }
  }
  out.require(pairs == 50 && worst_two_point <= 1e-12, "dichotomous grid");
  out.detail << "; dichotomous " << pairs << " pairs, max err " << worst_two_point;
  return out;
}

Outcome attainment(std::size_t n, std::uint64_t seed, unsigned threads) {
  Outcome out;
  for (const auto& [x, seed_offset] : {std::pair{0.75, 1}, std::pair{0.0, 2}}) {
    const auto summary = run_mc(optimal_rule(x, 1.0), {x}, {Method::occupation}, n, seed + seed_offset, threads);
    const auto& row = summary.rows.front();
    const auto& e = row.estimates.front();
    const double tol = 3.0 * e.std_error + kOccupationAllowance;
    out.detail << (seed_offset > 1 ? "; " : "") << "x=" << x << ": " << e.estimate << " vs bound " << row.bound
               << " (tol " << tol << ")";
    out.require(std::abs(e.estimate - row.bound) <= tol, "x=" + format_short(x));
  }
  return out;
}

Outcome dominance(std::uint64_t seed) {
  Outcome out;
  std::mt19937_64 gen(seed);
  const auto xs = linspace(-3.0, 3.0, 20);
  double min_gap = std::numeric_limits<double>::infinity();
  double max_excess = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 500; ++i) {
    const auto law = random_centered_law(gen, 8, 4.0);
    const double sigma = std::sqrt(moments(law).variance);
    for (double x : xs) {
      const double gap = sharp_bound(x, sigma) - exact_expected_local_time(law, x);
      min_gap = std::min(min_gap, gap);
      max_excess = std::max(max_excess, -gap);
    }
  }
  out.require(max_excess <= 1e-12, "dominance");
  out.require(min_gap > 1e-9, "strict gap for non-optimal laws");

  double attained = 0.0;
  for (double x : xs) {
    for (double sigma : {0.3, 1.0, 2.0}) {
      attained = std::max(attained, std::abs(sharp_bound(x, sigma) - exact_expected_local_time(TwoPointOptimal{x, sigma}, x)));
    }
  }
  out.require(attained <= 1e-12, "two-point optimal attains");
  out.detail << "500 laws x 20 levels: min gap " << min_gap << ", two-point optimal gap " << attained;
  return out;
}

Outcome optimal_y() {
  Outcome out;
  const std::pair<double, double> cases[] = {{0.1, 1.0}, {0.25, 0.5}, {0.5, 1.0}, {0.75, 1.0}, {1.0, 1.0},
                                             {1.5, 2.0}, {2.0, 1.0}, {3.0, 0.5}, {0.4, 3.0}, {5.0, 2.0}};
  constexpr int kGrid = 1'000'000;
  double worst_arg = 0.0;
  double worst_val = 0.0;
  for (const auto& [x, sigma] : cases) {
    const double lo = -sigma * sigma / x;
    double best_y = 0.0;
    double best = -1.0;
    for (int i = 1; i < kGrid; ++i) {
      const double y = lo + (0.0 - lo) * static_cast<double>(i) / kGrid;
      const double v = two_stage_objective(y, x, sigma);
      if (v > best) {
        best = v;
        best_y = y;
      }
    }
    const double s = std::sqrt(sigma * sigma + x * x);
    worst_arg = std::max(worst_arg, std::abs(best_y - (x - s)));
    worst_val = std::max(worst_val, std::abs(best - (s - x)));
  }
  out.require(worst_arg <= 1e-4, "argmax");
  out.require(worst_val <= 1e-9, "max value");
  out.detail << "10 pairs, max |argmax - y*| " << worst_arg << ", max value err " << worst_val;
  return out;
}

Outcome stopping_time_identity(std::size_t n, std::uint64_t seed, unsigned threads) {
  Outcome out;
  const auto summary = run_mc(StoppingRule::first_exit(-1.0, 2.0), {0.0}, {Method::occupation}, n, seed, threads);
  const auto& tau = summary.stopping_time;
  const double tol = 3.0 * tau.std_error() + 2.0 * kDt;
  out.require(std::abs(tau.mean() - 2.0) <= tol, "E[tau]");
  out.detail << "E[tau] " << tau.mean() << " vs 2 (tol " << tol << ", capped " << summary.capped_fraction << ")";
  return out;
}

Outcome estimator_cross_validation(std::size_t n, std::uint64_t seed, unsigned threads) {
  Outcome out;
  const auto summary = run_mc(StoppingRule::first_exit(-1.0, 1.0), {0.0, 0.5},
                              {Method::occupation, Method::upcrossing}, n, seed, threads);
  for (const auto& row : summary.rows) {
    const auto& occ = row.estimates[0];
    const auto& up = row.estimates[1];
    const double exact = *row.exact;
    const double tol_occ = 3.0 * occ.std_error + kOccupationAllowance;
    const double tol_up = 3.0 * up.std_error + kUpcrossingAllowance;
    const double tol_pair = 3.0 * std::hypot(occ.std_error, up.std_error) + kUpcrossingAllowance;
    const std::string at = "x=" + format_short(row.x);
    out.require(std::abs(occ.estimate - exact) <= tol_occ, at + " occupation");
    out.require(std::abs(up.estimate - exact) <= tol_up, at + " upcrossing");
    out.require(std::abs(occ.estimate - up.estimate) <= tol_pair, at + " agreement");
    out.detail << (row.x > 0 ? "; " : "") << at << ": exact " << exact << ", occ " << occ.estimate << ", up "
               << up.estimate;
  }
  return out;
}

Outcome embedding_round_trip(std::size_t n, std::uint64_t seed, unsigned threads) {
  Outcome out;
  std::mt19937_64 gen(seed);
  double worst = 0.0;
  int rational = 0;
  for (int i = 0; i < 200; ++i) {
    const auto target = i % 2 ? random_decimal_law(gen, 8) : random_centered_law(gen, 8, 4.0);
    const auto plan = chacon_walsh_plan(target);
    const auto report = verify_plan(plan);
    worst = std::max(worst, report.max_prob_gap);
    rational += plan.exact_arithmetic;
    out.require(report.exact_match, "round trip #" + std::to_string(i));
    out.require(plan.steps.size() + 1 <= target.size(), "plan length #" + std::to_string(i));
  }
  out.detail << "200 targets (" << rational << " exact-rational), max CDF gap " << worst;

  const auto target = FiniteSupport::from_atoms({{-1.0, 0.25}, {0.0, 0.5}, {1.0, 0.25}});
  const auto plan = chacon_walsh_plan(target);
  const auto summary = run_mc(StoppingRule::plan(plan.steps), {0.0}, {Method::occupation}, n, seed + 1, threads, true);

  std::vector<double> counts(target.size(), 0.0);
  std::size_t unmatched = 0;
  for (double v : summary.terminals) {
    bool matched = false;
    for (std::size_t k = 0; k < target.size(); ++k) {
      if (std::abs(v - target.atoms()[k].value) <= 1e-9) {
        counts[k] += 1.0;
        matched = true;
      }
    }
    unmatched += !matched;
  }
  const double total = static_cast<double>(summary.terminals.size());
  double stat = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double expected = total * target.atoms()[k].prob;
    stat += (counts[k] - expected) * (counts[k] - expected) / expected;
  }
  const boost::math::chi_squared chi2(static_cast<double>(target.size() - 1));
  const double p_value = boost::math::cdf(boost::math::complement(chi2, stat));
  out.require(unmatched == 0, "terminal values off the target support");
  out.require(p_value > 1e-3, "chi-square");

  const auto& e = summary.rows.front().estimates.front();
  const double exact = exact_expected_local_time(target, 0.0);
  const double tol = 3.0 * e.std_error + kOccupationAllowance;
  out.require(std::abs(e.estimate - exact) <= tol, "plan local time");
  out.detail << "; 3-point plan chi2 p=" << p_value << ", L_0 " << e.estimate << " vs " << exact << " (tol " << tol << ")";
  return out;
}

Outcome unimodality(std::uint64_t seed) {
  Outcome out;
  std::mt19937_64 gen(seed);
  std::vector<TerminalDistribution> laws{NormalLaw{1.0}, NormalLaw{2.5}, ShiftedExponential{1.0},
                                         ShiftedExponential{0.5}, ExitLaw{1.0, 3.0}, TwoPointOptimal{0.75, 1.0},
                                         TwoPointOptimal{-1.5, 2.0}};
  for (int i = 0; i < 200; ++i) laws.emplace_back(random_centered_law(gen, 8, 4.0));
  const auto positive = linspace(0.0, 6.0, 241);
  int violations = 0;
  for (const auto& law : laws) {
    double prev_pos = exact_expected_local_time(law, 0.0);
    double prev_neg = prev_pos;
    for (std::size_t i = 1; i < positive.size(); ++i) {
      const double pos = exact_expected_local_time(law, positive[i]);
      const double neg = exact_expected_local_time(law, -positive[i]);
      violations += pos > prev_pos + 1e-12;
      violations += neg > prev_neg + 1e-12;
      prev_pos = pos;
      prev_neg = neg;
    }
  }
  out.require(violations == 0, "monotone on each side");

  bool strictly = true;
  for (std::size_t i = 1; i < positive.size(); ++i) {
    strictly &= sharp_bound(positive[i], 1.0) < sharp_bound(positive[i - 1], 1.0);
    strictly &= sharp_bound(-positive[i], 1.0) < sharp_bound(-positive[i - 1], 1.0);
  }
  out.require(strictly, "sharp bound strictly decreasing in |x|");

  const double asymptote = 1e4 * sharp_bound(1e4, 1.0);
  out.require(std::abs(asymptote - 0.5) <= 1e-4, "x * bound -> 1/2");
  out.detail << laws.size() << " laws, " << violations << " violations; 1e4*bound(1e4,1) = " << format_full(asymptote);
  return out;
}

Outcome determinism(std::uint64_t seed) {
  Outcome out;
  auto csv = [seed](unsigned threads) {
    ExperimentSpec spec;
    spec.rule = parse_rule("twostage:x=0.75,y=-0.5,eta=1.25");
    spec.xs = {-0.5, 0.0, 0.75};
    spec.n_paths = 2000;
    spec.dt = kDt;
    spec.methods = {Method::occupation, Method::upcrossing, Method::exact};
    spec.seed = seed;
    spec.threads = threads;
    std::ostringstream os;
    write_csv(os, run_experiment(spec));
    return os.str();
  };
  const auto first = csv(1);
  const auto second = csv(1);
  const auto threaded = csv(3);
  out.require(first == second, "repeat run");
  out.require(first == threaded, "thread count changed output");
  out.detail << first.size() << " bytes, identical across repeats and thread counts";
  return out;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  const std::size_t n = options.quick ? 5000 : 50000;
  const auto seed = options.seed;
  const auto threads = options.threads;

  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> entries{
      {1, "exact-formula suite", [] { return exact_formula_suite(); }},
      {2, "attainment of the bound", [&] { return attainment(n, seed + 200, threads); }},
      {3, "sharpness and dominance", [&] { return dominance(seed + 300); }},
      {4, "optimality of y*", [] { return optimal_y(); }},
      {5, "E[tau] = sigma^2", [&] { return stopping_time_identity(n, seed + 500, threads); }},
      {6, "estimator cross-validation", [&] { return estimator_cross_validation(n, seed + 600, threads); }},
      {7, "embedding round trip", [&] { return embedding_round_trip(n, seed + 700, threads); }},
      {8, "unimodality and monotonicity", [&] { return unimodality(seed + 800); }},
      {9, "determinism", [&] { return determinism(seed + 900); }},
  };

  std::vector<CriterionResult> results;
  for (const auto& entry : entries) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult result{entry.id, entry.name, false, {}, 0.0};
    try {
      auto outcome = entry.run();
      result.passed = outcome.passed;
      result.detail = outcome.detail.str();
    } catch (const std::exception& e) {
      result.detail = std::string("exception: ") + e.what();
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (options.on_result) options.on_result(result);
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace ltime
