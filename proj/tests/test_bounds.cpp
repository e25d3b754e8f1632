#include <cmath>
#include <numbers>

#include <doctest.h>

#include "ltime/bounds.hpp"
#include "ltime/distributions.hpp"
#include "ltime/localtime.hpp"
#include "support.hpp"

using namespace ltime;
using testing::check_errc;

TEST_CASE("sharp bound examples") {
  for (double sigma : {0.5, 1.0, 3.0}) CHECK(sharp_bound(0.0, sigma) == sigma);
  CHECK(sharp_bound(0.75, 1.0) == 0.5);

  // Extended-precision oracle for both forms at x = 100.
  const long double x = 100.0L;
  const long double rationalized = 1.0L / (std::sqrt(10001.0L) + x);
  CHECK(std::abs(sharp_bound(100.0, 1.0) - static_cast<double>(rationalized)) <= 1e-6 * rationalized);
  CHECK(std::abs(sharp_bound(100.0, 1.0) - 1.0 / 200.0) <= 2.5e-5);

  check_errc([] { (void)sharp_bound(1.0, 0.0); }, Errc::InvalidArgument);
}

TEST_CASE("sharp bound shape") {
  double prev = sharp_bound(0.0, 1.3);
  for (int i = 1; i <= 500; ++i) {
    const double x = 0.02 * i;
    const double v = sharp_bound(x, 1.3);
    CHECK(v < prev);
    CHECK(v == sharp_bound(-x, 1.3));
    prev = v;
  }
  // Large-x asymptote x * bound -> sigma^2 / 2, which the subtraction form
  // cannot reproduce.
  for (double sigma : {0.5, 1.0, 2.0}) {
    const double x = 1e8;
    CHECK(x * sharp_bound(x, sigma) == doctest::Approx(sigma * sigma / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("upcrossing bound") {
  for (double sigma : {0.5, 1.0, 2.0}) CHECK(upcrossing_bound(0.0, sigma, sigma) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(upcrossing_bound(0.75, 1.25, 1.0) == doctest::Approx(0.5).epsilon(1e-15));

  for (double x : {-1.0, 0.0, 0.4, 2.0}) {
    for (double sigma : {0.5, 1.0, 2.0}) {
      for (double frac : {0.1, 0.5, 1.0}) {
        const double b = x + frac * sigma;
        CHECK(2.0 * (b - x) * upcrossing_bound(x, b, sigma) == doctest::Approx(sharp_bound(x, sigma)).epsilon(1e-14));
      }
    }
  }

  check_errc([] { (void)upcrossing_bound(0.0, 2.0, 1.0); }, Errc::OutOfRegime);
  check_errc([] { (void)upcrossing_bound(0.5, 0.5, 1.0); }, Errc::InvalidArgument);
}

TEST_CASE("first-exit closed form") {
  CHECK(closed_form_first_exit(1.0, 1.0, 0.0) == 1.0);
  CHECK(closed_form_first_exit(1.0, 4.0, 0.0) == doctest::Approx(1.6).epsilon(1e-15));
  for (double a : {0.5, 1.0, 3.0}) {
    for (double b : {0.25, 2.0}) {
      CHECK(closed_form_first_exit(a, b, b) == 0.0);
      CHECK(closed_form_first_exit(a, b, -a) == 0.0);
      // Linear on each side of 0.
      const double mid = closed_form_first_exit(a, b, b / 2.0);
      CHECK(mid == doctest::Approx(closed_form_first_exit(a, b, 0.0) / 2.0).epsilon(1e-14));
      // Agrees with the law-based evaluator.
      for (double x : {-a, -a / 3.0, 0.0, b / 5.0, b}) {
        CHECK(std::abs(closed_form_first_exit(a, b, x) - exact_expected_local_time(ExitLaw{a, b}, x)) <= 1e-12);
        CHECK(closed_form_first_exit(a, b, x) <= sharp_bound(x, std::sqrt(a * b)) + 1e-12);
      }
    }
  }
  check_errc([] { (void)closed_form_first_exit(1.0, 1.0, 1.5); }, Errc::OutOfInterval);
  check_errc([] { (void)closed_form_first_exit(1.0, 1.0, -1.01); }, Errc::OutOfInterval);
}

TEST_CASE("normal closed form") {
  CHECK(closed_form_normal(1.0, 0.0) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-15));
  CHECK(closed_form_normal(2.0, 0.0) == doctest::Approx(2.0 * std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-15));

  // Quadrature oracle: 2 * integral over z > x of (z - x) phi(z) dz.
  auto oracle = [](double sigma, double x) {
    const int n = 200000;
    const double lo = std::abs(x) / sigma;
    const double hi = lo + 40.0;
    const double h = (hi - lo) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double z = lo + i * h;
      const double f = (sigma * z - std::abs(x)) * std::exp(-z * z / 2.0) / std::sqrt(2.0 * std::numbers::pi);
      s += (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0)) * f;
    }
    return 2.0 * s * h / 3.0;
  };
  for (double sigma : {0.5, 1.0, 2.0}) {
    for (double x : {-2.0, -0.5, 0.0, 0.7, 3.0}) {
      CHECK(closed_form_normal(sigma, x) == doctest::Approx(oracle(sigma, x)).epsilon(1e-9));
      CHECK(closed_form_normal(sigma, x) == doctest::Approx(exact_expected_local_time(NormalLaw{sigma}, x)).epsilon(1e-12));
    }
  }
  const double at5 = closed_form_normal(1.0, 5.0);
  CHECK(at5 == doctest::Approx(oracle(1.0, 5.0)).epsilon(1e-6));
  CHECK(at5 < sharp_bound(5.0, 1.0));
  CHECK(sharp_bound(5.0, 1.0) == doctest::Approx(0.0990195).epsilon(1e-6));

  check_errc([] { (void)closed_form_normal(0.0, 1.0); }, Errc::InvalidArgument);
}

TEST_CASE("exponential closed form") {
  CHECK(closed_form_exponential(1.0, 0.0) == doctest::Approx(2.0 / std::numbers::e).epsilon(1e-15));
  CHECK(closed_form_exponential(1.0, 1.0) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-15));
  for (double sigma : {0.3, 1.0, 5.0}) {
    for (double x : {0.0, 0.1, 1.0, 10.0}) {
      CHECK(closed_form_exponential(sigma, x) < sigma);
      CHECK(closed_form_exponential(sigma, x) <= sharp_bound(x, sigma) + 1e-12);
      CHECK(std::abs(closed_form_exponential(sigma, x) - exact_expected_local_time(ShiftedExponential{sigma}, x)) <= 1e-12);
    }
  }
  check_errc([] { (void)closed_form_exponential(1.0, -0.1); }, Errc::NegativeX);
}

TEST_CASE("attainment by the two-point optimal law") {
  for (double x : {-3.0, -0.4, 0.0, 0.75, 2.0}) {
    for (double sigma : {0.5, 1.0, 2.5}) {
      CHECK(std::abs(exact_expected_local_time(TwoPointOptimal{x, sigma}, x) - sharp_bound(x, sigma)) <= 1e-12);
    }
  }
}

TEST_CASE("bound report") {
  const auto r = make_bound_report(0.75, 1.0, 0.5, BoundSource::exact);
  CHECK(r.bound == 0.5);
  CHECK(r.ratio == doctest::Approx(1.0));
  CHECK(r.source == BoundSource::exact);

  const auto mc = make_bound_report(0.0, 1.0, 1.02, BoundSource::mc);
  CHECK(mc.ratio == doctest::Approx(1.02));
  // An exact reference above the bound would contradict the theorem.
  check_errc([] { (void)make_bound_report(0.0, 1.0, 1.1, BoundSource::exact); }, Errc::InvalidArgument);
}
