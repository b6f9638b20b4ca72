#pragma once

// The acceptance suite: ten pass/fail checks covering the numerics, the
// statistical limits and reproducibility.

#include <cstdint>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace rap {

struct AcceptanceOptions {
  std::set<int> only;              // empty runs every criterion
  int threads = 0;                 // 0: hardware concurrency
  std::uint64_t seed = 20061011;
  std::ostream* log = nullptr;     // progress lines, if set
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

inline constexpr int kCriterionCount = 10;

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt);

// One line per result: "[PASS] 3 title (1.2 s): detail".
std::string format_result(const CriterionResult& r);

}  // namespace rap
