#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ltime {

struct Interval {
  double lower;
  double upper;

  /// Raises Errc::InvalidArgument unless lower < upper.
  static Interval make(double lower, double upper);

  [[nodiscard]] bool contains_strictly(double v) const noexcept { return lower < v && v < upper; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

class StoppingRule;

/// First exit from an interval straddling the start point 0.
struct FirstExit {
  Interval band;
};

struct FirstHit {
  double level;
};

/// Exit (y, x); if at y stop, if at x exit (x - eta, x + eta).
struct TwoStage {
  double x;
  double y;
  double eta;
};

/// Iterated first exits; an interval not strictly containing the current
/// position is skipped.
struct PlanSequence {
  std::vector<Interval> steps;
};

struct TimeCap {
  std::shared_ptr<const StoppingRule> inner;
  double cap;
};

/// Immutable value description of a non-randomized stopping time on a
/// Brownian path started at 0.
class StoppingRule {
 public:
  using Variant = std::variant<FirstExit, FirstHit, TwoStage, PlanSequence, TimeCap>;

  static StoppingRule first_exit(double lower, double upper);
  static StoppingRule first_hit(double level);
  static StoppingRule two_stage(double x, double y, double eta);
  static StoppingRule plan(std::vector<Interval> steps);
  static StoppingRule with_cap(StoppingRule inner, double cap);

  [[nodiscard]] const Variant& variant() const noexcept { return rule_; }

  template <class Rule>
  [[nodiscard]] const Rule* get_if() const noexcept {
    return std::get_if<Rule>(&rule_);
  }

 private:
  explicit StoppingRule(Variant rule) : rule_(std::move(rule)) {}
  Variant rule_;
};

/// (x - s, x + s), s = sqrt(sigma^2 + x^2): the exit interval attaining the
/// largest expected local time at x among stopping times with E[tau] = sigma^2.
Interval optimal_interval(double x, double sigma);
StoppingRule optimal_rule(double x, double sigma);

/// Expected local time at x > 0 of the two-stage rule with first interval
/// (y, x) and the variance budget spent entirely after reaching x:
/// sqrt(-(sigma^2 + x y) y / (x - y)). Errc::InfeasibleY when sigma^2 + x y <= 0.
double two_stage_objective(double y, double x, double sigma);

// ---------------------------------------------------------------------------
// Rule interpretation

struct Continue {};
/// An intermediate boundary was reached: clamp to `level` and keep going.
struct ContinueFromLevel {
  double level;
};
struct StopAtLevel {
  double level;
};
struct StopNow {};

using Decision = std::variant<Continue, ContinueFromLevel, StopAtLevel, StopNow>;

/// Per-path state machine over a StoppingRule. Lives inside one path
/// evaluation and is never shared.
class RuleCursor {
 public:
  explicit RuleCursor(const StoppingRule& rule);

  [[nodiscard]] bool stopped() const noexcept { return stage_ >= stages_.size(); }
  /// Absorbing band of the active stage; sides may be infinite. Only
  /// meaningful while !stopped().
  [[nodiscard]] const Interval& band() const noexcept { return stages_[stage_].band; }
  [[nodiscard]] double time_cap() const noexcept { return time_cap_; }
  [[nodiscard]] double position() const noexcept { return position_; }

  /// The boundary level the grid value reached or passed, if any.
  [[nodiscard]] std::optional<double> crossed(double value) const noexcept;
  /// Record that the path reached `level` on the active band's boundary.
  Decision hit(double level);

 private:
  struct Stage {
    Interval band;
    bool stop_at_lower;
    bool stop_at_upper;
  };
  void skip_inactive() noexcept;

  std::vector<Stage> stages_;
  std::size_t stage_ = 0;
  double position_ = 0.0;
  double time_cap_ = std::numeric_limits<double>::infinity();
};

/// One grid step of the rule: boundary crossing first, then the time cap.
Decision apply_rule(RuleCursor& cursor, double value, double elapsed);

/// Grammar: `firstexit:a=<r>,b=<r>`, `optimal:x=<r>,sigma=<r>`,
/// `twostage:x=<r>,y=<r>,eta=<r>`, `plan:lower,upper;lower,upper;...`,
/// `firsthit:level=<r>`, each with an optional `,cap=<r>` suffix.
StoppingRule parse_rule(std::string_view text);
std::string to_string(const StoppingRule& rule);

std::string format_plan(const std::vector<Interval>& steps);
std::vector<Interval> parse_plan_steps(std::string_view text);

}  // namespace ltime
