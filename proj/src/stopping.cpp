#include "ltime/stopping.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "grammar.hpp"
#include "ltime/error.hpp"

namespace ltime {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, std::string(what) + " must be finite");
}

}  // namespace

Interval Interval::make(double lower, double upper) {
  require_finite(lower, "interval lower end");
  require_finite(upper, "interval upper end");
  if (!(lower < upper)) {
    throw Error(Errc::InvalidArgument, "interval needs lower < upper, got (" + fmt(lower) + ", " + fmt(upper) + ")");
  }
  return {lower, upper};
}

StoppingRule StoppingRule::first_exit(double lower, double upper) {
  const auto band = Interval::make(lower, upper);
  if (!band.contains_strictly(0.0)) {
    throw Error(Errc::InvalidArgument, "first-exit interval must straddle the start point 0");
  }
  return StoppingRule(FirstExit{band});
}

StoppingRule StoppingRule::first_hit(double level) {
  require_finite(level, "hitting level");
  return StoppingRule(FirstHit{level});
}

StoppingRule StoppingRule::two_stage(double x, double y, double eta) {
  require_finite(x, "x");
  require_finite(y, "y");
  if (!(y < 0.0 && 0.0 < x)) throw Error(Errc::InvalidArgument, "two-stage rule needs y < 0 < x");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error(Errc::InvalidArgument, "two-stage rule needs eta > 0");
  return StoppingRule(TwoStage{x, y, eta});
}

StoppingRule StoppingRule::plan(std::vector<Interval> steps) {
  for (const auto& step : steps) (void)Interval::make(step.lower, step.upper);
  return StoppingRule(PlanSequence{std::move(steps)});
}

StoppingRule StoppingRule::with_cap(StoppingRule inner, double cap) {
  if (!(cap > 0.0) || !std::isfinite(cap)) throw Error(Errc::InvalidArgument, "time cap must be positive");
  return StoppingRule(TimeCap{std::make_shared<const StoppingRule>(std::move(inner)), cap});
}

// ---------------------------------------------------------------------------

Interval optimal_interval(double x, double sigma) {
  if (!(sigma > 0.0)) throw Error(Errc::InvalidArgument, "sigma must be positive");
  require_finite(x, "x");
  const double ax = std::abs(x);
  const double s = std::hypot(sigma, ax);
  const Interval positive{ax - s, ax + s};
  // Built for |x| and reflected for negative x.
  return x < 0.0 ? Interval{-positive.upper, -positive.lower} : positive;
}

StoppingRule optimal_rule(double x, double sigma) {
  const auto band = optimal_interval(x, sigma);
  return StoppingRule::first_exit(band.lower, band.upper);
}

double two_stage_objective(double y, double x, double sigma) {
  if (!(sigma > 0.0)) throw Error(Errc::InvalidArgument, "sigma must be positive");
  if (!(y < 0.0 && 0.0 < x)) throw Error(Errc::InvalidArgument, "objective needs y < 0 < x");
  const double budget = sigma * sigma + x * y;
  if (!(budget > 0.0)) {
    throw Error(Errc::InfeasibleY, "sigma^2 + x*y = " + fmt(budget) + " leaves no variance for the second stage");
  }
  return std::sqrt(-budget * y / (x - y));
}

// ---------------------------------------------------------------------------

RuleCursor::RuleCursor(const StoppingRule& rule) {
  const StoppingRule* current = &rule;
  while (const auto* capped = current->get_if<TimeCap>()) {
    time_cap_ = std::min(time_cap_, capped->cap);
    current = capped->inner.get();
  }
  if (const auto* r = current->get_if<FirstExit>()) {
    stages_.push_back({r->band, true, true});
  } else if (const auto* r = current->get_if<FirstHit>()) {
    if (r->level > 0.0) stages_.push_back({Interval{-kInf, r->level}, true, true});
    if (r->level < 0.0) stages_.push_back({Interval{r->level, kInf}, true, true});
  } else if (const auto* r = current->get_if<TwoStage>()) {
    stages_.push_back({Interval{r->y, r->x}, true, false});
    stages_.push_back({Interval{r->x - r->eta, r->x + r->eta}, true, true});
  } else if (const auto* r = current->get_if<PlanSequence>()) {
    for (const auto& step : r->steps) stages_.push_back({step, false, false});
  }
  skip_inactive();
}

void RuleCursor::skip_inactive() noexcept {
  while (stage_ < stages_.size() && !stages_[stage_].band.contains_strictly(position_)) ++stage_;
}

std::optional<double> RuleCursor::crossed(double value) const noexcept {
  const auto& b = band();
  if (value >= b.upper) return b.upper;
  if (value <= b.lower) return b.lower;
  return std::nullopt;
}

Decision RuleCursor::hit(double level) {
  const auto& stage = stages_[stage_];
  const bool terminal = level == stage.band.lower ? stage.stop_at_lower : stage.stop_at_upper;
  position_ = level;
  if (terminal) {
    stage_ = stages_.size();
    return StopAtLevel{level};
  }
  ++stage_;
  skip_inactive();
  if (stopped()) return StopAtLevel{level};
  return ContinueFromLevel{level};
}

Decision apply_rule(RuleCursor& cursor, double value, double elapsed) {
  if (cursor.stopped()) return StopNow{};
  if (const auto level = cursor.crossed(value)) return cursor.hit(*level);
  if (elapsed >= cursor.time_cap()) return StopNow{};
  return Continue{};
}

// ---------------------------------------------------------------------------

std::string format_plan(const std::vector<Interval>& steps) {
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) out += ';';
    out += fmt(steps[i].lower) + "," + fmt(steps[i].upper);
  }
  return out;
}

std::vector<Interval> parse_plan_steps(std::string_view text) {
  std::vector<Interval> steps;
  if (detail::trim(text).empty()) return steps;
  for (auto item : detail::split(text, ';')) {
    const auto ends = detail::split(item, ',');
    if (ends.size() != 2) {
      throw Error(Errc::ParseError, "plan step '" + std::string(item) + "': expected lower,upper");
    }
    steps.push_back(Interval::make(detail::parse_real(ends[0], "lower"), detail::parse_real(ends[1], "upper")));
  }
  return steps;
}

StoppingRule parse_rule(std::string_view text) {
  text = detail::trim(text);
  const std::string context = "rule '" + std::string(text) + "'";
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw Error(Errc::ParseError, context + ": expected <kind>:<params>");
  const auto kind = detail::trim(text.substr(0, colon));
  auto body = text.substr(colon + 1);

  std::optional<double> cap;
  if (const auto pos = body.rfind("cap="); pos != std::string_view::npos) {
    if (pos > 0 && body[pos - 1] != ',' && body[pos - 1] != ':') {
      throw Error(Errc::ParseError, context + ": cap must follow a comma");
    }
    cap = detail::parse_real(body.substr(pos + 4), "cap");
    body = body.substr(0, pos == 0 ? 0 : pos - 1);
  }

  auto build = [&]() -> StoppingRule {
    if (kind == "plan") return StoppingRule::plan(parse_plan_steps(body));
    const auto pairs = detail::parse_pairs(body, context);
    if (kind == "firstexit") {
      const double a = detail::require_real(pairs, "a", context);
      const double b = detail::require_real(pairs, "b", context);
      if (!(a > 0.0) || !(b > 0.0)) throw Error(Errc::InvalidArgument, context + ": a and b must be positive");
      return StoppingRule::first_exit(-a, b);
    }
    if (kind == "optimal") {
      return optimal_rule(detail::require_real(pairs, "x", context), detail::require_real(pairs, "sigma", context));
    }
    if (kind == "twostage") {
      return StoppingRule::two_stage(detail::require_real(pairs, "x", context),
                                     detail::require_real(pairs, "y", context),
                                     detail::require_real(pairs, "eta", context));
    }
    if (kind == "firsthit") return StoppingRule::first_hit(detail::require_real(pairs, "level", context));
    throw Error(Errc::ParseError, context + ": unknown rule kind '" + std::string(kind) + "'");
  };

  auto rule = build();
  if (cap) return StoppingRule::with_cap(std::move(rule), *cap);
  return rule;
}

std::string to_string(const StoppingRule& rule) {
  if (const auto* r = rule.get_if<FirstExit>()) {
    return "firstexit:a=" + fmt(-r->band.lower) + ",b=" + fmt(r->band.upper);
  }
  if (const auto* r = rule.get_if<FirstHit>()) return "firsthit:level=" + fmt(r->level);
  if (const auto* r = rule.get_if<TwoStage>()) {
    return "twostage:x=" + fmt(r->x) + ",y=" + fmt(r->y) + ",eta=" + fmt(r->eta);
  }
  if (const auto* r = rule.get_if<PlanSequence>()) return "plan:" + format_plan(r->steps);
  const auto& capped = std::get<TimeCap>(rule.variant());
  auto inner = to_string(*capped.inner);
  if (inner.back() != ':') inner += ',';
  return inner + "cap=" + fmt(capped.cap);
}

}  // namespace ltime
