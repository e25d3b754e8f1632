#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <doctest.h>

#include "ltime/bounds.hpp"
#include "ltime/brownian.hpp"
#include "ltime/distributions.hpp"
#include "ltime/localtime.hpp"
#include "ltime/stopping.hpp"
#include "support.hpp"

using namespace ltime;
using testing::check_errc;

namespace {

PathGrid make_path(std::vector<double> values, double dt = 1.0) {
  PathGrid p;
  p.dt = dt;
  p.stopped_index = values.size() - 1;
  p.values = std::move(values);
  return p;
}

}  // namespace

TEST_CASE("exact evaluator examples") {
  CHECK(exact_expected_local_time(TwoPointOptimal{0.75, 1.0}, 0.75) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(exact_expected_local_time(ExitLaw{1.0, 1.0}, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(exact_expected_local_time(ExitLaw{1.0, 2.0}, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(exact_expected_local_time(NormalLaw{1.0}, 0.0) == doctest::Approx(0.7978845608028654).epsilon(1e-15));
  CHECK(exact_expected_local_time(ShiftedExponential{1.0}, 1.0) == doctest::Approx(0.2706705664732254).epsilon(1e-14));

  check_errc([] { (void)exact_expected_local_time(FiniteSupport::from_atoms({{-1.0, 0.3}, {1.0, 0.7}}), 0.0); },
             Errc::NonZeroMean);
}

TEST_CASE("the three forms of the exact formula agree") {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 300; ++trial) {
    const auto law = testing::random_law(gen);
    for (double x : {-2.5, -1.0, -0.3, 0.0, 0.2, 0.9, 2.5}) {
      const double via_abs = testing::expect(law, [x](double v) { return std::abs(v - x); }) - std::abs(x);
      const double pos = 2.0 * testing::expect(law, [x](double v) { return std::max(v - x, 0.0); });
      const double neg = 2.0 * testing::expect(law, [x](double v) { return std::max(x - v, 0.0); });
      const double got = exact_expected_local_time(law, x);
      CHECK(std::abs(got - via_abs) <= 1e-12);
      if (x >= 0.0) CHECK(std::abs(got - pos) <= 1e-12);
      if (x <= 0.0) CHECK(std::abs(got - neg) <= 1e-12);
    }
  }
}

TEST_CASE("dominance, unimodality and first-exit linearity") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 300; ++trial) {
    const auto law = testing::random_law(gen);
    const double sigma = std::sqrt(moments(law).variance);
    double prev_right = exact_expected_local_time(law, 0.0);
    double prev_left = prev_right;
    for (int i = 0; i <= 60; ++i) {
      const double x = 0.05 * i;
      if (sigma > 0.0) {
        CHECK(exact_expected_local_time(law, x) <= sharp_bound(x, sigma) + 1e-12);
        CHECK(exact_expected_local_time(law, -x) <= sharp_bound(-x, sigma) + 1e-12);
      }
      const double right = exact_expected_local_time(law, x);
      const double left = exact_expected_local_time(law, -x);
      CHECK(right <= prev_right + 1e-12);
      CHECK(left <= prev_left + 1e-12);
      prev_right = right;
      prev_left = left;
    }
  }

  const double a = 1.5;
  const double b = 2.0;
  const double peak = exact_expected_local_time(ExitLaw{a, b}, 0.0);
  for (int i = 0; i <= 10; ++i) {
    const double x = b * i / 10.0;
    CHECK(exact_expected_local_time(ExitLaw{a, b}, x) == doctest::Approx(peak * (1.0 - x / b)).epsilon(1e-13));
    const double y = -a * i / 10.0;
    CHECK(exact_expected_local_time(ExitLaw{a, b}, y) == doctest::Approx(peak * (1.0 + y / a)).epsilon(1e-13));
  }
}

TEST_CASE("occupation estimator on hand paths") {
  CHECK(estimate_occupation(make_path({0.0, 0.0}), 5.0, 0.1) == 0.0);
  CHECK(estimate_occupation(make_path({0.0, 0.0}), 0.0, 1.0) == 1.0);
  // Three of four samples within 0.5 of 0.2, dt = 0.1.
  CHECK(estimate_occupation(make_path({0.0, 0.3, 0.6, 1.0}, 0.1), 0.2, 0.5) == doctest::Approx(0.3));
  check_errc([] { (void)estimate_occupation(make_path({0.0}), 0.0, 0.0); }, Errc::InvalidArgument);
}

TEST_CASE("upcrossing counter on hand paths") {
  CHECK(count_upcrossings(make_path({0.0, 1.0}), 0.2, 0.8) == 1);
  CHECK(count_upcrossings(make_path({0.0, 1.0, 0.0, 1.0}), 0.2, 0.8) == 2);
  CHECK(count_upcrossings(make_path({0.0, -0.5, -1.0, -2.0}), 0.2, 0.8) == 0);
  // Oscillating inside the band completes nothing.
  CHECK(count_upcrossings(make_path({0.0, 0.5, 0.3, 0.7, 0.1}), 0.2, 0.8) == 0);
  // Samples beyond stopped_index are ignored.
  auto p = make_path({0.0, 1.0, 0.0, 1.0});
  p.stopped_index = 1;
  CHECK(count_upcrossings(p, 0.2, 0.8) == 1);
  check_errc([] { (void)count_upcrossings(make_path({0.0}), 0.5, 0.5); }, Errc::InvalidArgument);
}

TEST_CASE("upcrossing estimator on hand paths") {
  CHECK(estimate_via_upcrossings(make_path({0.0, -1.0, -2.0}), 0.5, 0.1) == 0.0);
  const auto p = make_path({0.0, 1.0, 0.0, 1.0}, 0.01);
  CHECK(estimate_via_upcrossings(p, 0.2, 0.6, UpcrossingScale::nominal) == doctest::Approx(2.0 * 0.6 * 2.0));
  // Negative levels use the window below x: (-0.8, -0.2) here.
  const auto q = make_path({0.0, -1.0, 0.0, -1.0, 0.0}, 0.01);
  CHECK(estimate_via_upcrossings(q, -0.2, 0.6, UpcrossingScale::nominal) == doctest::Approx(2.0 * 0.6 * 2.0));
}

TEST_CASE("accumulator merging is associative") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> draw(1.0, 2.0);
  std::vector<double> xs(1000);
  for (auto& x : xs) x = draw(gen);

  Accumulator whole;
  for (double x : xs) whole.add(x);

  // ((a + b) + c) versus (a + (b + c)) with uneven parts.
  Accumulator a, b, c;
  for (std::size_t i = 0; i < xs.size(); ++i) (i < 137 ? a : i < 612 ? b : c).add(xs[i]);
  Accumulator left = a;
  left.merge(b);
  left.merge(c);
  Accumulator bc = b;
  bc.merge(c);
  Accumulator right = a;
  right.merge(bc);

  for (const auto* acc : {&left, &right}) {
    CHECK(acc->count() == whole.count());
    CHECK(std::abs(acc->mean() - whole.mean()) <= 1e-13);
    CHECK(std::abs(acc->m2() - whole.m2()) <= 1e-13 * whole.m2());
  }

  // Two-pass oracle for the variance.
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  CHECK(whole.variance() == doctest::Approx(ss / (xs.size() - 1)).epsilon(1e-12));

  Accumulator empty;
  empty.merge(whole);
  CHECK(empty.mean() == whole.mean());
}

TEST_CASE("Monte Carlo estimators on the symmetric unit exit") {
  const auto rule = StoppingRule::first_exit(-1.0, 1.0);
  const std::vector<double> levels{0.0, 0.5};
  const std::vector<Method> methods{Method::occupation, Method::upcrossing};
  EnsembleOptions options;
  options.n_paths = 50000;
  options.path.dt = 1e-4;
  options.epsilon = 0.02;
  options.seed = 8;
  const auto result = run_ensemble(rule, levels, methods, options);
  CHECK(result.capped == 0);

  const double exact[] = {1.0, 0.5};
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& occ = result.at(l, 0);
    const auto& up = result.at(l, 1);
    CHECK(occ.count() == 50000);
    CHECK(std::abs(occ.mean() - exact[l]) <= 3.0 * occ.std_error() + 0.03);
    CHECK(std::abs(up.mean() - exact[l]) <= 3.0 * up.std_error() + 0.05);
    CHECK(std::abs(occ.mean() - up.mean()) <= 3.0 * std::hypot(occ.std_error(), up.std_error()) + 0.05);
  }
}

TEST_CASE("mc_expected_local_time") {
  SUBCASE("optimal rule attains the bound") {
    const auto est = mc_expected_local_time(optimal_rule(0.75, 1.0), 0.75, 50000, 1e-4, 0.02, Method::occupation, 12);
    CHECK(est.n_paths == 50000);
    CHECK(est.epsilon == 0.02);
    CHECK(std::abs(est.value - 0.5) <= 3.0 * est.std_error + 0.03);
  }
  SUBCASE("two paths still give a finite estimate") {
    const auto est = mc_expected_local_time(StoppingRule::first_exit(-1.0, 1.0), 0.0, 2, 1e-3, 0.05,
                                            Method::upcrossing, 1);
    CHECK(est.n_paths == 2);
    CHECK(std::isfinite(est.value));
    CHECK(std::isfinite(est.std_error));
    CHECK(est.value >= 0.0);
  }
  SUBCASE("exact method uses the terminal law") {
    const auto est = mc_expected_local_time(StoppingRule::first_exit(-1.0, 2.0), 0.5, 100, 1e-3, 0.05, Method::exact, 1);
    CHECK(est.value == doctest::Approx(2.0 * 1.0 * 1.5 / 3.0).epsilon(1e-15));
    CHECK(est.std_error == 0.0);
    CHECK_FALSE(est.epsilon);
  }
  SUBCASE("capped paths are excluded and reported") {
    const auto rule = StoppingRule::first_exit(-3.0, 3.0);
    const auto est = mc_expected_local_time(rule, 0.0, 200, 1e-3, 0.05, Method::occupation, 5, 2.0);
    CHECK(est.capped_fraction > 0.0);
    CHECK(est.capped_fraction < 1.0);
    // n_paths counts the paths behind the estimate.
    CHECK(static_cast<double>(est.n_paths) == doctest::Approx(200.0 * (1.0 - est.capped_fraction)));
    CHECK_FALSE(est.warnings.empty());
  }
  SUBCASE("every path capped is an error") {
    check_errc([] {
      (void)mc_expected_local_time(StoppingRule::first_hit(100.0), 0.0, 10, 1e-2, 0.05, Method::occupation, 1, 0.1);
    }, Errc::AllPathsCapped);
  }
  SUBCASE("argument validation") {
    const auto rule = StoppingRule::first_exit(-1.0, 1.0);
    check_errc([&] { (void)mc_expected_local_time(rule, 0.0, 1, 1e-3, 0.05, Method::occupation, 1); },
               Errc::InvalidArgument);
    check_errc([&] { (void)mc_expected_local_time(rule, 0.0, 10, 1e-3, 0.0, Method::occupation, 1); },
               Errc::InvalidArgument);
    check_errc([] { (void)mc_expected_local_time(StoppingRule::first_hit(1.0), 0.0, 10, 1e-3, 0.05, Method::exact, 1); },
               Errc::InvalidArgument);
  }
}

TEST_CASE("ensemble results do not depend on the thread count") {
  const auto rule = StoppingRule::two_stage(0.5, -0.5, 0.75);
  const std::vector<double> levels{-0.25, 0.5};
  const std::vector<Method> methods{Method::occupation, Method::upcrossing};
  EnsembleOptions options;
  options.n_paths = 1500;
  options.path.dt = 1e-3;
  options.epsilon = 0.05;
  options.seed = 3;
  options.keep_terminals = true;
  const auto one = run_ensemble(rule, levels, methods, options);
  options.threads = 4;
  const auto four = run_ensemble(rule, levels, methods, options);
  for (std::size_t i = 0; i < one.estimates.size(); ++i) {
    CHECK(one.estimates[i].mean() == four.estimates[i].mean());
    CHECK(one.estimates[i].m2() == four.estimates[i].m2());
  }
  CHECK(one.stopping_time.mean() == four.stopping_time.mean());
  CHECK(one.terminals == four.terminals);
}

TEST_CASE("default window") {
  CHECK(default_epsilon(1e-4) == doctest::Approx(std::max(0.05, std::pow(1e-4, 0.4))));
  CHECK(default_epsilon(1e-4) >= 5.0 * std::sqrt(1e-4));
}

TEST_CASE("method names") {
  for (auto m : {Method::occupation, Method::upcrossing, Method::exact}) CHECK(parse_method(to_string(m)) == m);
  check_errc([] { (void)parse_method("tanaka"); }, Errc::ParseError);
}
