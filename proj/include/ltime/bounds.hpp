#pragma once

namespace ltime {

/// sqrt(sigma^2 + x^2) - |x|, evaluated as sigma^2 / (sqrt(sigma^2 + x^2) + |x|)
/// so it stays accurate for |x| >> sigma.
double sharp_bound(double x, double sigma);

/// Sharp bound on expected upcrossings of (x, b) for b - x <= sigma:
/// sharp_bound(x, sigma) / (2 (b - x)). Errc::OutOfRegime beyond that range.
double upcrossing_bound(double x, double b, double sigma);

/// Expected local time at x of the first exit from (-a, b).
double closed_form_first_exit(double a, double b, double x);

/// 2 sigma phi(x / sigma) - 2 x Phibar(x / sigma) for x >= 0, mirrored for x < 0.
double closed_form_normal(double sigma, double x);

/// sigma (2 / e) exp(-x / sigma), x >= 0 only (Errc::NegativeX).
double closed_form_exponential(double sigma, double x);

enum class BoundSource { exact, mc };

struct BoundReport {
  double x;
  double sigma;
  double bound;
  double reference_value;
  double ratio;
  BoundSource source;
};

BoundReport make_bound_report(double x, double sigma, double reference_value, BoundSource source);

}  // namespace ltime
