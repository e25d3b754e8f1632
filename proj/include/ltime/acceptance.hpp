#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ltime {

struct CriterionResult {
  int id;
  std::string name;
  bool passed;
  std::string detail;
  double seconds;
};

struct AcceptanceOptions {
  /// Monte Carlo criteria at N = 5000 instead of 50000.
  bool quick = false;
  unsigned threads = 1;
  std::uint64_t seed = 20240601;
  std::function<void(const CriterionResult&)> on_result;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

}  // namespace ltime
