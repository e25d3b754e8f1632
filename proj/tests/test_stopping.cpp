#include <cmath>
#include <variant>

#include <doctest.h>

#include "ltime/distributions.hpp"
#include "ltime/embedding.hpp"
#include "ltime/stopping.hpp"
#include "support.hpp"

using namespace ltime;
using testing::check_errc;

TEST_CASE("interval construction") {
  const auto i = Interval::make(-1.0, 2.0);
  CHECK(i.contains_strictly(0.0));
  CHECK_FALSE(i.contains_strictly(-1.0));
  CHECK_FALSE(i.contains_strictly(2.0));
  check_errc([] { (void)Interval::make(1.0, 1.0); }, Errc::InvalidArgument);
  check_errc([] { (void)Interval::make(2.0, 1.0); }, Errc::InvalidArgument);
}

TEST_CASE("rule factories validate") {
  check_errc([] { (void)StoppingRule::first_exit(0.5, 1.0); }, Errc::InvalidArgument);
  check_errc([] { (void)StoppingRule::first_exit(-1.0, 0.0); }, Errc::InvalidArgument);
  check_errc([] { (void)StoppingRule::two_stage(0.75, 0.1, 1.0); }, Errc::InvalidArgument);
  check_errc([] { (void)StoppingRule::two_stage(-0.75, -0.5, 1.0); }, Errc::InvalidArgument);
  check_errc([] { (void)StoppingRule::two_stage(0.75, -0.5, 0.0); }, Errc::InvalidArgument);
  check_errc([] { (void)StoppingRule::with_cap(StoppingRule::first_exit(-1.0, 1.0), 0.0); }, Errc::InvalidArgument);
}

TEST_CASE("optimal interval examples") {
  auto i = optimal_interval(0.0, 1.0);
  CHECK(i.lower == -1.0);
  CHECK(i.upper == 1.0);

  i = optimal_interval(0.75, 1.0);
  CHECK(i.lower == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(i.upper == doctest::Approx(2.0).epsilon(1e-15));

  i = optimal_interval(-0.75, 1.0);
  CHECK(i.lower == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(i.upper == doctest::Approx(0.5).epsilon(1e-15));

  check_errc([] { (void)optimal_interval(0.5, 0.0); }, Errc::InvalidArgument);
}

TEST_CASE("optimal interval straddles zero with endpoint product -sigma^2") {
  for (double x : {-5.0, -1.0, -0.1, 0.0, 0.3, 2.0, 10.0}) {
    for (double sigma : {0.2, 1.0, 4.0}) {
      const auto i = optimal_interval(x, sigma);
      CHECK(i.contains_strictly(0.0));
      CHECK(i.lower * i.upper == doctest::Approx(-sigma * sigma).epsilon(1e-12));
    }
  }
}

TEST_CASE("two-stage objective") {
  const double x = 0.75;
  const double sigma = 1.0;
  const double y_star = x - std::sqrt(sigma * sigma + x * x);
  CHECK(two_stage_objective(y_star, x, sigma) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(two_stage_objective(-1e-12, x, sigma) < 1e-5);

  check_errc([] { (void)two_stage_objective(-2.0, 0.75, 1.0); }, Errc::InfeasibleY);
  // The feasibility boundary itself is excluded.
  check_errc([] { (void)two_stage_objective(-1.0 / 0.75, 0.75, 1.0); }, Errc::InfeasibleY);
  check_errc([] { (void)two_stage_objective(0.1, 0.75, 1.0); }, Errc::InvalidArgument);
}

TEST_CASE("two-stage objective: closed-form maximum over a grid of pairs") {
  for (double x : {0.05, 0.3, 0.75, 1.0, 2.5, 6.0}) {
    for (double sigma : {0.25, 1.0, 2.0}) {
      const double s = std::sqrt(sigma * sigma + x * x);
      const double best = two_stage_objective(x - s, x, sigma);
      CHECK(std::abs(best - (s - x)) <= 1e-12);
      const double lo = -sigma * sigma / x;
      for (int k = 1; k < 2000; ++k) {
        const double y = lo + (0.0 - lo) * k / 2000.0;
        CHECK(two_stage_objective(y, x, sigma) <= best + 1e-15);
      }
    }
  }
}

TEST_CASE("two-stage brute-force argmax") {
  const double x = 0.75;
  const double sigma = 1.0;
  const double lo = -sigma * sigma / x;
  double best = -1.0;
  double arg = 0.0;
  const int n = 1'000'000;
  for (int k = 1; k < n; ++k) {
    const double y = lo + (0.0 - lo) * k / n;
    // Oracle written out directly rather than through the library.
    const double v = std::sqrt(-(sigma * sigma + x * y) * y / (x - y));
    if (v > best) {
      best = v;
      arg = y;
    }
  }
  CHECK(std::abs(arg - (-0.5)) <= 1e-4);
  CHECK(std::abs(two_stage_objective(arg, x, sigma) - best) <= 1e-15);
}

TEST_CASE("two-stage with the optimal parameters collapses to a single exit") {
  for (double x : {0.25, 0.75, 2.0}) {
    const double sigma = 1.0;
    const double s = std::sqrt(sigma * sigma + x * x);
    const auto staged = terminal_law(StoppingRule::two_stage(x, x - s, s));
    const auto single = terminal_law(optimal_rule(x, sigma));
    REQUIRE(staged);
    REQUIRE(single);
    const auto a = staged->finite_support();
    const auto b = single->finite_support();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.atoms()[i].value == doctest::Approx(b.atoms()[i].value).epsilon(1e-14));
      CHECK(a.atoms()[i].prob == doctest::Approx(b.atoms()[i].prob).epsilon(1e-14));
    }
  }
}

TEST_CASE("apply_rule on a first exit") {
  RuleCursor cursor(StoppingRule::first_exit(-1.0, 1.0));
  CHECK(std::holds_alternative<Continue>(apply_rule(cursor, 0.3, 0.1)));
  const auto d = apply_rule(cursor, 1.02, 0.2);
  REQUIRE(std::holds_alternative<StopAtLevel>(d));
  CHECK(std::get<StopAtLevel>(d).level == 1.0);
  CHECK(cursor.stopped());
}

TEST_CASE("apply_rule on a two-stage rule") {
  const auto rule = StoppingRule::two_stage(0.75, -0.5, 1.25);
  SUBCASE("touching y first is a full stop") {
    RuleCursor cursor(rule);
    CHECK(std::holds_alternative<Continue>(apply_rule(cursor, -0.2, 0.1)));
    const auto d = apply_rule(cursor, -0.5, 0.2);
    REQUIRE(std::holds_alternative<StopAtLevel>(d));
    CHECK(std::get<StopAtLevel>(d).level == -0.5);
  }
  SUBCASE("touching x moves to the second interval") {
    RuleCursor cursor(rule);
    const auto d = apply_rule(cursor, 0.8, 0.1);
    REQUIRE(std::holds_alternative<ContinueFromLevel>(d));
    CHECK(std::get<ContinueFromLevel>(d).level == 0.75);
    CHECK(cursor.band().lower == doctest::Approx(-0.5));
    CHECK(cursor.band().upper == doctest::Approx(2.0));
    // The lower side of the second band is now x - eta = -0.5, an absorbing level.
    CHECK(std::holds_alternative<Continue>(apply_rule(cursor, 0.0, 0.2)));
    const auto stop = apply_rule(cursor, 2.1, 0.3);
    REQUIRE(std::holds_alternative<StopAtLevel>(stop));
    CHECK(std::get<StopAtLevel>(stop).level == doctest::Approx(2.0));
  }
}

TEST_CASE("apply_rule with a time cap") {
  RuleCursor cursor(StoppingRule::with_cap(StoppingRule::first_exit(-1.0, 1.0), 0.5));
  CHECK(std::holds_alternative<Continue>(apply_rule(cursor, 0.1, 0.4)));
  CHECK(std::holds_alternative<StopNow>(apply_rule(cursor, 0.1, 0.5)));
}

TEST_CASE("apply_rule on a plan skips inactive steps") {
  // Start at 0: (0.5, 1) does not contain 0 and is skipped.
  RuleCursor cursor(StoppingRule::plan({Interval::make(0.5, 1.0), Interval::make(-1.0, 1.0)}));
  CHECK(cursor.band().lower == -1.0);
  const auto d = apply_rule(cursor, -1.3, 0.1);
  REQUIRE(std::holds_alternative<StopAtLevel>(d));
  CHECK(std::get<StopAtLevel>(d).level == -1.0);

  RuleCursor empty(StoppingRule::plan({}));
  CHECK(empty.stopped());
}

TEST_CASE("first hit") {
  RuleCursor cursor(StoppingRule::first_hit(0.5));
  CHECK(std::holds_alternative<Continue>(apply_rule(cursor, -10.0, 1.0)));
  const auto d = apply_rule(cursor, 0.6, 2.0);
  REQUIRE(std::holds_alternative<StopAtLevel>(d));
  CHECK(std::get<StopAtLevel>(d).level == 0.5);
}

TEST_CASE("rule grammar") {
  auto r = parse_rule("firstexit:a=1,b=2");
  REQUIRE(r.get_if<FirstExit>());
  CHECK(r.get_if<FirstExit>()->band == Interval{-1.0, 2.0});

  r = parse_rule("optimal:x=0.75,sigma=1");
  REQUIRE(r.get_if<FirstExit>());
  CHECK(r.get_if<FirstExit>()->band.upper == doctest::Approx(2.0));

  r = parse_rule("twostage:x=0.75,y=-0.5,eta=1.25");
  REQUIRE(r.get_if<TwoStage>());
  CHECK(r.get_if<TwoStage>()->eta == 1.25);

  r = parse_rule("plan:-1,0.3333333333333333;0,1");
  REQUIRE(r.get_if<PlanSequence>());
  CHECK(r.get_if<PlanSequence>()->steps.size() == 2);

  r = parse_rule("firstexit:a=1,b=1,cap=5");
  REQUIRE(r.get_if<TimeCap>());
  CHECK(r.get_if<TimeCap>()->cap == 5.0);
  CHECK(r.get_if<TimeCap>()->inner->get_if<FirstExit>());

  for (const char* text : {"firstexit:a=1,b=2", "twostage:x=0.75,y=-0.5,eta=1.25", "plan:-1,0.5;0,1",
                           "firstexit:a=1,b=1,cap=5", "firsthit:level=0.5", "plan:"}) {
    CHECK(to_string(parse_rule(to_string(parse_rule(text)))) == to_string(parse_rule(text)));
  }

  check_errc([] { (void)parse_rule("firstexit:a=1"); }, Errc::ParseError);
  check_errc([] { (void)parse_rule("wiggle:a=1"); }, Errc::ParseError);
  check_errc([] { (void)parse_rule("firstexit"); }, Errc::ParseError);
  check_errc([] { (void)parse_rule("plan:1;2"); }, Errc::ParseError);
  check_errc([] { (void)parse_rule("optimal:x=0.5,sigma=0"); }, Errc::InvalidArgument);
}
