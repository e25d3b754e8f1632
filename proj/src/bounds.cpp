#include "ltime/bounds.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "ltime/distributions.hpp"
#include "ltime/error.hpp"

namespace ltime {

namespace {

void require_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(Errc::InvalidArgument, "sigma must be a finite positive real");
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

double sharp_bound(double x, double sigma) {
  require_sigma(sigma);
  const double ax = std::abs(x);
  return sigma * sigma / (std::hypot(sigma, ax) + ax);
}

double upcrossing_bound(double x, double b, double sigma) {
  require_sigma(sigma);
  if (!(b > x)) throw Error(Errc::InvalidArgument, "upcrossing band needs b > x");
  if (b - x > sigma) {
    throw Error(Errc::OutOfRegime, "b - x = " + num(b - x) + " exceeds sigma = " + num(sigma));
  }
  return sharp_bound(x, sigma) / (2.0 * (b - x));
}

double closed_form_first_exit(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(Errc::InvalidArgument, "a and b must be positive");
  if (x < -a || x > b) {
    throw Error(Errc::OutOfInterval, "x = " + num(x) + " outside [-a, b]");
  }
  return x >= 0.0 ? 2.0 * a * (b - x) / (a + b) : 2.0 * b * (a + x) / (a + b);
}

double closed_form_normal(double sigma, double x) {
  require_sigma(sigma);
  const double ax = std::abs(x);
  const double z = ax / sigma;
  return 2.0 * sigma * normal_pdf(z) - 2.0 * ax * normal_survival(z);
}

double closed_form_exponential(double sigma, double x) {
  require_sigma(sigma);
  if (x < 0.0) throw Error(Errc::NegativeX, "closed form holds for x >= 0 only");
  return sigma * (2.0 / std::numbers::e) * std::exp(-x / sigma);
}

BoundReport make_bound_report(double x, double sigma, double reference_value, BoundSource source) {
  const double bound = sharp_bound(x, sigma);
  const double ratio = reference_value / bound;
  if (source == BoundSource::exact && ratio > 1.0 + 1e-9) {
    throw Error(Errc::InvalidArgument, "exact reference " + num(reference_value) + " exceeds the bound " + num(bound));
  }
  return BoundReport{x, sigma, bound, reference_value, ratio, source};
}

}  // namespace ltime
