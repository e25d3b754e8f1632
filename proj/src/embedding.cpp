#include "ltime/embedding.hpp"

#include <cstdio>
#include <algorithm>
#include <cmath>
#include <map>

#include <boost/multiprecision/cpp_int.hpp>

#include "ltime/brownian.hpp"
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

using Rational = boost::multiprecision::cpp_rational;

constexpr double kMeanTolerance = 1e-12;
constexpr double kLawTolerance = 1e-10;
constexpr long long kMaxDenominator = 1'000'000;

template <class S>
struct AtomT {
  S value;
  S prob;
};

template <class S>
struct IntervalT {
  S lower;
  S upper;
};

template <class S>
S abs_of(const S& v) {
  return v < S(0) ? S(-v) : v;
}

/// Values at or below this count as "line does not rise above the minorant".
template <class S>
S rise_tolerance(const S& scale) {
  if constexpr (std::is_floating_point_v<S>) {
    return 1e-14 * scale;
  } else {
    (void)scale;
    return S(0);
  }
}

/// Convex piecewise-linear function with slopes -1 / +1 beyond its ends.
template <class S>
struct Minorant {
  std::vector<S> at;
  std::vector<S> value;

  S operator()(const S& x) const {
    if (x <= at.front()) return value.front() + (at.front() - x);
    if (x >= at.back()) return value.back() + (x - at.back());
    const auto hi = static_cast<std::size_t>(std::upper_bound(at.begin(), at.end(), x) - at.begin());
    const auto lo = hi - 1;
    return value[lo] + (x - at[lo]) * (value[hi] - value[lo]) / (at[hi] - at[lo]);
  }
};

/// Raise `m` to max(m, line) and return the interval where the line was
/// strictly above, if any.
template <class S>
std::optional<IntervalT<S>> raise_to_line(Minorant<S>& m, const S& anchor, const S& anchor_value, const S& slope,
                                          const S& tolerance) {
  auto line = [&](const S& x) { return anchor_value + slope * (x - anchor); };
  const std::size_t n = m.at.size();
  std::vector<S> gap(n);
  for (std::size_t k = 0; k < n; ++k) gap[k] = line(m.at[k]) - m.value[k];

  std::size_t first = n;
  std::size_t last = n;
  for (std::size_t k = 0; k < n; ++k) {
    if (gap[k] > tolerance) {
      if (first == n) first = k;
      last = k;
    }
  }
  if (first == n) return std::nullopt;

  // gap is concave, so the positive set is one interval [first, last] of
  // breakpoints plus linear run-outs on both sides.
  const S left = first == 0 ? S(m.at[0] - gap[0] / (slope + S(1)))
                            : S(m.at[first - 1] + (-gap[first - 1]) * (m.at[first] - m.at[first - 1]) /
                                                      (gap[first] - gap[first - 1]));
  const S right = last == n - 1 ? S(m.at[n - 1] + gap[n - 1] / (S(1) - slope))
                                : S(m.at[last] + gap[last] * (m.at[last + 1] - m.at[last]) /
                                                     (gap[last] - gap[last + 1]));

  Minorant<S> next;
  for (std::size_t k = 0; k < n && m.at[k] < left; ++k) {
    next.at.push_back(m.at[k]);
    next.value.push_back(m.value[k]);
  }
  next.at.push_back(left);
  next.value.push_back(line(left));
  next.at.push_back(right);
  next.value.push_back(line(right));
  for (std::size_t k = 0; k < n; ++k) {
    if (m.at[k] > right) {
      next.at.push_back(m.at[k]);
      next.value.push_back(m.value[k]);
    }
  }
  m = std::move(next);
  return IntervalT<S>{left, right};
}

template <class S>
std::vector<IntervalT<S>> build_plan(const std::vector<AtomT<S>>& atoms) {
  std::vector<IntervalT<S>> steps;
  const std::size_t n = atoms.size();
  if (n < 2) return steps;

  S scale(1);
  for (const auto& a : atoms) scale = std::max(scale, abs_of(a.value));
  const S tolerance = rise_tolerance(scale);

  Minorant<S> minorant{{S(0)}, {S(0)}};
  S cumulative(0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    // Linear piece of E|X - x| on [x_i, x_{i+1}]: slope 2 F(x_i) - 1.
    cumulative += atoms[i].prob;
    const S slope = S(2) * cumulative - S(1);
    S anchor_value(0);
    for (const auto& a : atoms) anchor_value += a.prob * abs_of(S(a.value - atoms[i].value));
    if (auto step = raise_to_line(minorant, atoms[i].value, anchor_value, slope, tolerance)) steps.push_back(*step);
  }
  return steps;
}

template <class S>
std::map<S, S> propagate(const std::map<S, S>& start, std::span<const IntervalT<S>> steps,
                         std::vector<std::map<S, S>>* history = nullptr) {
  std::map<S, S> law = start;
  if (history) history->push_back(law);
  for (const auto& step : steps) {
    std::map<S, S> next;
    for (const auto& [position, mass] : law) {
      if (step.lower < position && position < step.upper) {
        const S w = (position - step.lower) / (step.upper - step.lower);
        next[step.upper] += mass * w;
        next[step.lower] += mass * (S(1) - w);
      } else {
        next[position] += mass;
      }
    }
    law = std::move(next);
    if (history) history->push_back(law);
  }
  return law;
}

/// Best continued-fraction approximant with denominator <= kMaxDenominator,
/// accepted only if it reproduces v within 1e-12.
std::optional<Rational> to_rational(double v) {
  if (!std::isfinite(v)) return std::nullopt;
  const bool negative = v < 0.0;
  double x = std::abs(v);
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double r = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_real = std::floor(r);
    if (a_real > 1e15) break;
    const auto a = static_cast<long long>(a_real);
    const long long h2 = a * h1 + h0;
    const long long k2 = a * k1 + k0;
    if (k2 > kMaxDenominator) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    const double frac = r - a_real;
    if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - x) <= 1e-15 * std::max(1.0, x) || frac < 1e-300) {
      break;
    }
    r = 1.0 / frac;
  }
  if (k1 == 0) return std::nullopt;
  const double approx = static_cast<double>(h1) / static_cast<double>(k1);
  if (std::abs(approx - x) > 1e-12 * std::max(1.0, x)) return std::nullopt;
  Rational q(h1, k1);
  return negative ? Rational(-q) : q;
}

std::optional<std::vector<AtomT<Rational>>> rational_atoms(const FiniteSupport& law) {
  std::vector<AtomT<Rational>> out;
  Rational total(0);
  for (const auto& atom : law.atoms()) {
    auto value = to_rational(atom.value);
    auto prob = to_rational(atom.prob);
    if (!value || !prob || *prob <= 0) return std::nullopt;
    total += *prob;
    out.push_back({*value, *prob});
  }
  Rational mean(0);
  for (auto& a : out) {
    a.prob /= total;
    mean += a.prob * a.value;
  }
  if (mean != 0) return std::nullopt;
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (!(out[i - 1].value < out[i].value)) return std::nullopt;
  }
  return out;
}

FiniteSupport to_finite_support(const std::map<double, double>& law) {
  std::vector<Atom> atoms;
  double total = 0.0;
  for (const auto& [value, mass] : law) {
    if (mass > 0.0) {
      atoms.push_back({value, mass});
      total += mass;
    }
  }
  // Floating-point propagation can drift a few ulps from 1.
  for (auto& atom : atoms) atom.prob /= total;
  return FiniteSupport::from_atoms(std::move(atoms), true);
}

std::vector<IntervalT<double>> as_generic(std::span<const Interval> steps) {
  std::vector<IntervalT<double>> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back({s.lower, s.upper});
  return out;
}

double cdf_at(std::span<const Atom> atoms, double t, double slack) {
  double acc = 0.0;
  for (const auto& atom : atoms) {
    if (atom.value <= t + slack) acc += atom.prob;
  }
  return acc;
}

}  // namespace

EmbeddingPlan chacon_walsh_plan(const TerminalDistribution& target) {
  const auto law = target.finite_support();
  const double mean = moments(law).mean;
  if (std::abs(mean) > kMeanTolerance) {
    throw Error(Errc::NonZeroMean, "embedding target must have mean 0, got " + format_mean(mean));
  }

  if (auto exact = rational_atoms(law)) {
    const auto steps = build_plan(*exact);
    std::map<Rational, Rational> start{{Rational(0), Rational(1)}};
    const auto reached = propagate<Rational>(start, steps);
    std::map<Rational, Rational> wanted;
    for (const auto& a : *exact) wanted[a.value] = a.prob;
    if (reached == wanted) {
      EmbeddingPlan plan{{}, law, true};
      for (const auto& s : steps) {
        plan.steps.push_back(Interval{static_cast<double>(s.lower), static_cast<double>(s.upper)});
      }
      return plan;
    }
  }

  std::vector<AtomT<double>> atoms;
  for (const auto& a : law.atoms()) atoms.push_back({a.value, a.prob});
  EmbeddingPlan plan{{}, law, false};
  for (const auto& s : build_plan(atoms)) plan.steps.push_back(Interval{s.lower, s.upper});
  return plan;
}

FiniteSupport terminal_law_of_plan(std::span<const Interval> steps) {
  const auto generic = as_generic(steps);
  return to_finite_support(propagate<double>({{0.0, 1.0}}, generic));
}

std::vector<FiniteSupport> plan_law_sequence(std::span<const Interval> steps) {
  const auto generic = as_generic(steps);
  std::vector<std::map<double, double>> history;
  propagate<double>({{0.0, 1.0}}, generic, &history);
  std::vector<FiniteSupport> out;
  out.reserve(history.size());
  for (const auto& law : history) out.push_back(to_finite_support(law));
  return out;
}

PlanReport verify_plan(const EmbeddingPlan& plan) {
  PlanReport report;
  const auto sequence = plan_law_sequence(plan.steps);
  const auto& reached = sequence.back();

  double scale = 1.0;
  for (const auto& a : plan.target.atoms()) scale = std::max(scale, std::abs(a.value));
  const double slack = 1e-12 * scale;

  std::vector<double> points;
  for (const auto& a : reached.atoms()) points.push_back(a.value);
  for (const auto& a : plan.target.atoms()) points.push_back(a.value);

  const auto reached_potential = potential(reached);
  const auto target_potential = potential(plan.target);
  for (double t : points) {
    report.max_prob_gap = std::max(report.max_prob_gap,
                                   std::abs(cdf_at(reached.atoms(), t, slack) - cdf_at(plan.target.atoms(), t, slack)));
    report.potential_gap = std::max(report.potential_gap, std::abs(reached_potential(t) - target_potential(t)));
  }
  report.exact_match = report.max_prob_gap <= kLawTolerance && report.potential_gap <= kLawTolerance;

  report.convex_order_monotone = true;
  for (std::size_t k = 0; k < sequence.size(); ++k) {
    report.step_variances.push_back(moments(sequence[k]).variance);
    if (k > 0 && !is_dilation(sequence[k - 1], sequence[k])) report.convex_order_monotone = false;
  }
  return report;
}

double sample_terminal_exact(const EmbeddingPlan& plan, RandomStream& rng) {
  return sample_terminal_exact(std::span<const Interval>(plan.steps), rng);
}

std::optional<TerminalDistribution> terminal_law(const StoppingRule& rule) {
  if (const auto* r = rule.get_if<FirstExit>()) return ExitLaw{-r->band.lower, r->band.upper};
  if (const auto* r = rule.get_if<TwoStage>()) {
    const double reach_x = -r->y / (r->x - r->y);
    return FiniteSupport::from_atoms({{r->y, 1.0 - reach_x}, {r->x - r->eta, 0.5 * reach_x}, {r->x + r->eta, 0.5 * reach_x}},
                                     true);
  }
  if (const auto* r = rule.get_if<PlanSequence>()) return terminal_law_of_plan(r->steps);
  return std::nullopt;
}

}  // namespace ltime
