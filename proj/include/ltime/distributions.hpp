#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ltime/random.hpp"

namespace ltime {

struct Atom {
  double value;
  double prob;
};

/// A discrete law with strictly increasing support and strictly positive
/// probabilities summing to one.
class FiniteSupport {
 public:
  /// Sorts by value, checks that probabilities sum to 1 within 1e-12 and
  /// renormalizes. Duplicate values are rejected unless `merge_duplicates`
  /// is set, in which case their probabilities are added.
  static FiniteSupport from_atoms(std::vector<Atom> atoms, bool merge_duplicates = false);
  static FiniteSupport point_mass(double value);

  [[nodiscard]] std::span<const Atom> atoms() const noexcept { return atoms_; }
  [[nodiscard]] std::size_t size() const noexcept { return atoms_.size(); }
  [[nodiscard]] double min() const noexcept { return atoms_.front().value; }
  [[nodiscard]] double max() const noexcept { return atoms_.back().value; }

 private:
  explicit FiniteSupport(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}
  std::vector<Atom> atoms_;
};

/// Two-point law on {x - s, x + s}, s = sqrt(sigma^2 + x^2), with mean zero.
struct TwoPointOptimal {
  double x;
  double sigma;
};

/// Exit law of Brownian motion from (-a, b): P(b) = a / (a + b).
struct ExitLaw {
  double a;
  double b;
};

struct NormalLaw {
  double sigma;
};

/// Law of sigma * (Y - 1) with Y ~ Exp(1).
struct ShiftedExponential {
  double sigma;
};

class TerminalDistribution {
 public:
  using Variant = std::variant<FiniteSupport, TwoPointOptimal, ExitLaw, NormalLaw, ShiftedExponential>;

  // Validating constructors; parameters outside their domain raise
  // Errc::InvalidArgument.
  TerminalDistribution(FiniteSupport law);  // NOLINT(google-explicit-constructor)
  TerminalDistribution(TwoPointOptimal law);  // NOLINT(google-explicit-constructor)
  TerminalDistribution(ExitLaw law);  // NOLINT(google-explicit-constructor)
  TerminalDistribution(NormalLaw law);  // NOLINT(google-explicit-constructor)
  TerminalDistribution(ShiftedExponential law);  // NOLINT(google-explicit-constructor)

  [[nodiscard]] const Variant& variant() const noexcept { return law_; }

  template <class Law>
  [[nodiscard]] const Law* get_if() const noexcept {
    return std::get_if<Law>(&law_);
  }

  /// True for every family with finitely many atoms (the two-point families
  /// included).
  [[nodiscard]] bool has_finite_support() const noexcept;

  /// The atoms of a finite-support law; Errc::NonFiniteSupport otherwise.
  [[nodiscard]] FiniteSupport finite_support() const;

 private:
  Variant law_;
};

struct Moments {
  double mean;
  double variance;
};

Moments moments(const TerminalDistribution& dist);

/// E[(X - x)^+].
double expected_positive_part(const TerminalDistribution& dist, double x);

/// E[(X - x)^-] = E[(x - X)^+].
double expected_negative_part(const TerminalDistribution& dist, double x);

/// Law of -X. Not available for ShiftedExponential (no family member).
TerminalDistribution mirrored(const TerminalDistribution& dist);

/// Convex piecewise-linear x -> E|X - x| of a finite-support law. Outside the
/// breakpoints the slopes are -1 and +1.
class PotentialFn {
 public:
  PotentialFn(std::vector<double> breakpoints, std::vector<double> values);

  [[nodiscard]] double operator()(double x) const noexcept;
  [[nodiscard]] double value(double x) const noexcept { return (*this)(x); }

  [[nodiscard]] std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  /// Slopes of the n + 1 linear pieces, left to right.
  [[nodiscard]] std::vector<double> slopes() const;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

PotentialFn potential(const TerminalDistribution& dist);

/// True iff `g` is a martingale dilation of `f`: E|Y - x| >= E|X - x| for all
/// x. Both laws must have finite support and equal means (Errc::MeanMismatch
/// beyond 1e-12).
bool is_dilation(const TerminalDistribution& f, const TerminalDistribution& g);

double sample(const TerminalDistribution& dist, RandomStream& rng);

/// Grammar: `finite:v=p,v=p,...`, `twopoint-opt:x=<r>,sigma=<r>`,
/// `firstexit:a=<r>,b=<r>`, `normal:sigma=<r>`, `exp:sigma=<r>`.
TerminalDistribution parse_distribution(std::string_view text);
std::string to_string(const TerminalDistribution& dist);

// Standard normal helpers.
double normal_pdf(double z) noexcept;
/// 1 - Phi(z), via erfc so the upper tail keeps full relative accuracy.
double normal_survival(double z) noexcept;

}  // namespace ltime
