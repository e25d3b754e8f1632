#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <doctest.h>

#include "ltime/distributions.hpp"
#include "ltime/error.hpp"

namespace testing {

/// Checks that fn throws ltime::Error with the given code.
inline void check_errc(const std::function<void()>& fn, ltime::Errc code) {
  bool thrown = false;
  try {
    fn();
  } catch (const ltime::Error& e) {
    thrown = true;
    CHECK(e.code() == code);
  }
  CHECK_MESSAGE(thrown, "expected ltime::Error");
}

/// Random centred law with 1..max_points atoms on [-2, 2] before rescaling.
inline ltime::FiniteSupport random_law(std::mt19937_64& gen, int max_points = 8) {
  std::uniform_int_distribution<int> count(1, max_points);
  std::uniform_real_distribution<double> value(-2.0, 2.0);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  const int n = count(gen);
  std::vector<double> v;
  while (static_cast<int>(v.size()) < n) {
    const double c = value(gen);
    bool distinct = true;
    for (double w : v) distinct = distinct && std::abs(c - w) > 1e-3;
    if (distinct) v.push_back(c);
  }
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& q : p) total += (q = weight(gen));
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += (p[i] /= total) * v[i];
  std::vector<ltime::Atom> atoms;
  for (int i = 0; i < n; ++i) atoms.push_back({v[i] - mean, p[i]});
  return ltime::FiniteSupport::from_atoms(std::move(atoms));
}

/// Sum over atoms of p * f(v): the brute-force oracle for any expectation.
template <class F>
double expect(const ltime::FiniteSupport& law, F&& f) {
  double s = 0.0;
  for (const auto& a : law.atoms()) s += a.prob * f(a.value);
  return s;
}

}  // namespace testing
