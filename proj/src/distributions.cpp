#include "ltime/distributions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "grammar.hpp"
#include "ltime/error.hpp"

namespace ltime {

namespace {

constexpr double kProbTolerance = 1e-12;
constexpr double kMeanTolerance = 1e-12;

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(Errc::InvalidArgument, std::string(what) + " must be a finite positive real, got " + fmt(v));
  }
}

std::array<Atom, 2> two_point_atoms(const TwoPointOptimal& law) {
  const double s = std::hypot(law.sigma, law.x);
  return {Atom{law.x - s, (s + law.x) / (2.0 * s)}, Atom{law.x + s, (s - law.x) / (2.0 * s)}};
}

std::array<Atom, 2> two_point_atoms(const ExitLaw& law) {
  return {Atom{-law.a, law.b / (law.a + law.b)}, Atom{law.b, law.a / (law.a + law.b)}};
}

double positive_part_sum(std::span<const Atom> atoms, double x) {
  double acc = 0.0;
  for (const auto& atom : atoms) acc += atom.prob * std::max(atom.value - x, 0.0);
  return acc;
}

double negative_part_sum(std::span<const Atom> atoms, double x) {
  double acc = 0.0;
  for (const auto& atom : atoms) acc += atom.prob * std::max(x - atom.value, 0.0);
  return acc;
}

}  // namespace

// ---------------------------------------------------------------------------

FiniteSupport FiniteSupport::from_atoms(std::vector<Atom> atoms, bool merge_duplicates) {
  if (atoms.empty()) throw Error(Errc::InvalidArgument, "finite-support law needs at least one atom");
  double total = 0.0;
  for (const auto& atom : atoms) {
    if (!std::isfinite(atom.value)) throw Error(Errc::InvalidArgument, "support value is not finite");
    if (!(atom.prob > 0.0) || !std::isfinite(atom.prob)) {
      throw Error(Errc::InvalidArgument, "probability at " + fmt(atom.value) + " must be positive, got " + fmt(atom.prob));
    }
    total += atom.prob;
  }
  if (std::abs(total - 1.0) > kProbTolerance) {
    throw Error(Errc::InvalidArgument, "probabilities sum to " + fmt(total) + ", expected 1");
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& l, const Atom& r) { return l.value < r.value; });

  std::vector<Atom> merged;
  merged.reserve(atoms.size());
  for (const auto& atom : atoms) {
    if (!merged.empty() && merged.back().value == atom.value) {
      if (!merge_duplicates) throw Error(Errc::InvalidArgument, "duplicate support value " + fmt(atom.value));
      merged.back().prob += atom.prob;
    } else {
      merged.push_back(atom);
    }
  }
  for (auto& atom : merged) atom.prob /= total;
  return FiniteSupport(std::move(merged));
}

FiniteSupport FiniteSupport::point_mass(double value) { return from_atoms({Atom{value, 1.0}}); }

// ---------------------------------------------------------------------------

TerminalDistribution::TerminalDistribution(FiniteSupport law) : law_(std::move(law)) {}

TerminalDistribution::TerminalDistribution(TwoPointOptimal law) : law_(law) {
  require_positive(law.sigma, "sigma");
  if (!std::isfinite(law.x)) throw Error(Errc::InvalidArgument, "x must be finite");
}

TerminalDistribution::TerminalDistribution(ExitLaw law) : law_(law) {
  require_positive(law.a, "a");
  require_positive(law.b, "b");
}

TerminalDistribution::TerminalDistribution(NormalLaw law) : law_(law) { require_positive(law.sigma, "sigma"); }

TerminalDistribution::TerminalDistribution(ShiftedExponential law) : law_(law) {
  require_positive(law.sigma, "sigma");
}

bool TerminalDistribution::has_finite_support() const noexcept {
  return !std::holds_alternative<NormalLaw>(law_) && !std::holds_alternative<ShiftedExponential>(law_);
}

FiniteSupport TerminalDistribution::finite_support() const {
  return std::visit(
      overloaded{
          [](const FiniteSupport& law) { return law; },
          [](const TwoPointOptimal& law) {
            const auto atoms = two_point_atoms(law);
            return FiniteSupport::from_atoms({atoms.begin(), atoms.end()});
          },
          [](const ExitLaw& law) {
            const auto atoms = two_point_atoms(law);
            return FiniteSupport::from_atoms({atoms.begin(), atoms.end()});
          },
          [this](const auto&) -> FiniteSupport {
            throw Error(Errc::NonFiniteSupport, to_string(*this) + " has no finite support");
          },
      },
      law_);
}

// ---------------------------------------------------------------------------

Moments moments(const TerminalDistribution& dist) {
  return std::visit(overloaded{
                        [](const FiniteSupport& law) {
                          double mean = 0.0;
                          for (const auto& atom : law.atoms()) mean += atom.prob * atom.value;
                          double var = 0.0;
                          for (const auto& atom : law.atoms()) var += atom.prob * (atom.value - mean) * (atom.value - mean);
                          return Moments{mean, var};
                        },
                        [](const TwoPointOptimal& law) { return Moments{0.0, law.sigma * law.sigma}; },
                        [](const ExitLaw& law) { return Moments{0.0, law.a * law.b}; },
                        [](const NormalLaw& law) { return Moments{0.0, law.sigma * law.sigma}; },
                        [](const ShiftedExponential& law) { return Moments{0.0, law.sigma * law.sigma}; },
                    },
                    dist.variant());
}

double expected_positive_part(const TerminalDistribution& dist, double x) {
  return std::visit(overloaded{
                        [x](const FiniteSupport& law) { return positive_part_sum(law.atoms(), x); },
                        [x](const TwoPointOptimal& law) { return positive_part_sum(two_point_atoms(law), x); },
                        [x](const ExitLaw& law) { return positive_part_sum(two_point_atoms(law), x); },
                        [x](const NormalLaw& law) {
                          const double z = x / law.sigma;
                          return law.sigma * normal_pdf(z) - x * normal_survival(z);
                        },
                        [x](const ShiftedExponential& law) {
                          if (x < -law.sigma) return -x;
                          return law.sigma * std::exp(-(1.0 + x / law.sigma));
                        },
                    },
                    dist.variant());
}

double expected_negative_part(const TerminalDistribution& dist, double x) {
  return std::visit(overloaded{
                        [x](const FiniteSupport& law) { return negative_part_sum(law.atoms(), x); },
                        [x](const TwoPointOptimal& law) { return negative_part_sum(two_point_atoms(law), x); },
                        [x](const ExitLaw& law) { return negative_part_sum(two_point_atoms(law), x); },
                        [x](const NormalLaw& law) {
                          const double z = -x / law.sigma;
                          return law.sigma * normal_pdf(z) + x * normal_survival(z);
                        },
                        [x](const ShiftedExponential& law) {
                          if (x <= -law.sigma) return 0.0;
                          const double u = x / law.sigma + 1.0;
                          return law.sigma * (u - 1.0 + std::exp(-u));
                        },
                    },
                    dist.variant());
}

TerminalDistribution mirrored(const TerminalDistribution& dist) {
  return std::visit(overloaded{
                        [](const FiniteSupport& law) -> TerminalDistribution {
                          std::vector<Atom> atoms;
                          for (const auto& atom : law.atoms()) atoms.push_back({-atom.value, atom.prob});
                          return FiniteSupport::from_atoms(std::move(atoms));
                        },
                        [](const TwoPointOptimal& law) -> TerminalDistribution {
                          return TwoPointOptimal{-law.x, law.sigma};
                        },
                        [](const ExitLaw& law) -> TerminalDistribution { return ExitLaw{law.b, law.a}; },
                        [](const NormalLaw& law) -> TerminalDistribution { return law; },
                        [](const ShiftedExponential&) -> TerminalDistribution {
                          throw Error(Errc::InvalidArgument, "the mirrored shifted exponential is not a supported family");
                        },
                    },
                    dist.variant());
}

// ---------------------------------------------------------------------------

PotentialFn::PotentialFn(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (breakpoints_.empty() || breakpoints_.size() != values_.size()) {
    throw Error(Errc::InvalidArgument, "potential needs matching nonempty breakpoints and values");
  }
  if (!std::is_sorted(breakpoints_.begin(), breakpoints_.end(), std::less_equal<>{})) {
    throw Error(Errc::InvalidArgument, "potential breakpoints must be strictly increasing");
  }
}

double PotentialFn::operator()(double x) const noexcept {
  if (x <= breakpoints_.front()) return values_.front() + (breakpoints_.front() - x);
  if (x >= breakpoints_.back()) return values_.back() + (x - breakpoints_.back());
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  const auto hi = static_cast<std::size_t>(it - breakpoints_.begin());
  const auto lo = hi - 1;
  const double w = (x - breakpoints_[lo]) / (breakpoints_[hi] - breakpoints_[lo]);
  return values_[lo] + w * (values_[hi] - values_[lo]);
}

std::vector<double> PotentialFn::slopes() const {
  std::vector<double> out;
  out.reserve(breakpoints_.size() + 1);
  out.push_back(-1.0);
  for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
    out.push_back((values_[i + 1] - values_[i]) / (breakpoints_[i + 1] - breakpoints_[i]));
  }
  out.push_back(1.0);
  return out;
}

PotentialFn potential(const TerminalDistribution& dist) {
  const auto law = dist.finite_support();
  std::vector<double> breakpoints;
  std::vector<double> values;
  for (const auto& at : law.atoms()) {
    double v = 0.0;
    for (const auto& atom : law.atoms()) v += atom.prob * std::abs(atom.value - at.value);
    breakpoints.push_back(at.value);
    values.push_back(v);
  }
  return PotentialFn(std::move(breakpoints), std::move(values));
}

bool is_dilation(const TerminalDistribution& f, const TerminalDistribution& g) {
  const auto lf = f.finite_support();
  const auto lg = g.finite_support();
  const double mf = moments(lf).mean;
  const double mg = moments(lg).mean;
  if (std::abs(mf - mg) > kMeanTolerance) {
    throw Error(Errc::MeanMismatch, "means differ: " + fmt(mf) + " vs " + fmt(mg));
  }
  const auto pf = potential(lf);
  const auto pg = potential(lg);
  // Both are linear between consecutive points of the union and share the
  // asymptotes |x - mean|, so the union of breakpoints decides.
  auto check = [&](std::span<const double> points) {
    return std::all_of(points.begin(), points.end(), [&](double b) {
      const double a = pf(b);
      return pg(b) >= a - 1e-12 * (1.0 + std::abs(a));
    });
  };
  return check(pf.breakpoints()) && check(pg.breakpoints());
}

double sample(const TerminalDistribution& dist, RandomStream& rng) {
  auto draw_atoms = [&rng](std::span<const Atom> atoms) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (const auto& atom : atoms) {
      cumulative += atom.prob;
      if (u < cumulative) return atom.value;
    }
    return atoms.back().value;
  };
  return std::visit(overloaded{
                        [&](const FiniteSupport& law) { return draw_atoms(law.atoms()); },
                        [&](const TwoPointOptimal& law) { return draw_atoms(two_point_atoms(law)); },
                        [&](const ExitLaw& law) { return draw_atoms(two_point_atoms(law)); },
                        [&](const NormalLaw& law) { return law.sigma * rng.normal(); },
                        [&](const ShiftedExponential& law) { return law.sigma * (rng.exponential() - 1.0); },
                    },
                    dist.variant());
}

// ---------------------------------------------------------------------------

TerminalDistribution parse_distribution(std::string_view text) {
  text = detail::trim(text);
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error(Errc::ParseError, "distribution '" + std::string(text) + "': expected <family>:<params>");
  }
  const auto family = detail::trim(text.substr(0, colon));
  const auto body = text.substr(colon + 1);
  const std::string context = "distribution '" + std::string(text) + "'";
  const auto pairs = detail::parse_pairs(body, context);

  if (family == "finite") {
    std::vector<Atom> atoms;
    for (const auto& [k, v] : pairs) {
      atoms.push_back({detail::parse_real(k, "value"), detail::parse_real(v, "probability")});
    }
    return FiniteSupport::from_atoms(std::move(atoms));
  }
  if (family == "twopoint-opt") {
    return TwoPointOptimal{detail::require_real(pairs, "x", context), detail::require_real(pairs, "sigma", context)};
  }
  if (family == "firstexit") {
    return ExitLaw{detail::require_real(pairs, "a", context), detail::require_real(pairs, "b", context)};
  }
  if (family == "normal") return NormalLaw{detail::require_real(pairs, "sigma", context)};
  if (family == "exp") return ShiftedExponential{detail::require_real(pairs, "sigma", context)};
  throw Error(Errc::ParseError, context + ": unknown family '" + std::string(family) + "'");
}

std::string to_string(const TerminalDistribution& dist) {
  return std::visit(overloaded{
                        [](const FiniteSupport& law) {
                          std::string out = "finite:";
                          bool first = true;
                          for (const auto& atom : law.atoms()) {
                            if (!first) out += ',';
                            first = false;
                            out += fmt(atom.value) + "=" + fmt(atom.prob);
                          }
                          return out;
                        },
                        [](const TwoPointOptimal& law) {
                          return "twopoint-opt:x=" + fmt(law.x) + ",sigma=" + fmt(law.sigma);
                        },
                        [](const ExitLaw& law) { return "firstexit:a=" + fmt(law.a) + ",b=" + fmt(law.b); },
                        [](const NormalLaw& law) { return "normal:sigma=" + fmt(law.sigma); },
                        [](const ShiftedExponential& law) { return "exp:sigma=" + fmt(law.sigma); },
                    },
                    dist.variant());
}

double normal_pdf(double z) noexcept { return std::exp(-0.5 * z * z) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2); }

double normal_survival(double z) noexcept { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

}  // namespace ltime
