#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ltime/distributions.hpp"
#include "ltime/random.hpp"
#include "ltime/stopping.hpp"

namespace ltime {

struct EmbeddingPlan {
  std::vector<Interval> steps;
  FiniteSupport target;
  /// Construction ran in exact rational arithmetic.
  bool exact_arithmetic = false;
};

/// Chacon-Walsh embedding: starting from the potential |x| of the point mass
/// at 0, each linear piece of the target potential E|X - x| (taken in
/// increasing slope order) cuts the current minorant on an interval; exiting
/// that interval lifts the minorant to the line. At most n - 1 intervals for
/// an n-point target.
EmbeddingPlan chacon_walsh_plan(const TerminalDistribution& target);

/// Exact law of the final position of the interval sequence started at 0.
/// Mass strictly inside a step's interval splits to its endpoints; other
/// mass stays put for that step.
FiniteSupport terminal_law_of_plan(std::span<const Interval> steps);

/// Laws after 0, 1, ..., n steps.
std::vector<FiniteSupport> plan_law_sequence(std::span<const Interval> steps);

struct PlanReport {
  bool exact_match = false;
  /// Largest CDF difference between the plan's terminal law and the target.
  double max_prob_gap = 0.0;
  /// Largest difference between the two potentials over both supports.
  double potential_gap = 0.0;
  /// Each step's law dilates its predecessor's.
  bool convex_order_monotone = false;
  std::vector<double> step_variances;
};

PlanReport verify_plan(const EmbeddingPlan& plan);

double sample_terminal_exact(const EmbeddingPlan& plan, RandomStream& rng);

/// Terminal law of a rule when it is known in closed form (FirstExit,
/// TwoStage, PlanSequence); nullopt for FirstHit and time-capped rules.
std::optional<TerminalDistribution> terminal_law(const StoppingRule& rule);

}  // namespace ltime
