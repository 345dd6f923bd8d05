#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace crw {

struct VerifyOptions {
  std::uint64_t seed = 7;
  unsigned threads = 1;
  // Multiplies every tolerance, sigma band and window half-width; values
  // below 1 tighten the checks.
  double tolerance_scale = 1.0;
};

struct Measurement {
  std::string quantity;
  double value = 0.0;
};

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<Check> checks;
  std::vector<Measurement> data;  // deterministic for fixed (seed, tolerance)
  std::vector<std::string> table;  // human-readable prediction rows
  double seconds = 0.0;
  bool passed() const;
};

// Criteria 1..11; criterion 11 reruns the statistical suite at 1 and 8
// workers and compares the data rows byte for byte.
CriterionResult run_criterion(int id, const VerifyOptions& opts);

// exact: 1; statistical: 2, 3, 4, 9, 10; paper: 5, 6, 7, 8; all: 1..11.
std::vector<int> suite_criteria(std::string_view suite);

struct SuiteReport {
  std::string suite;
  std::vector<CriterionResult> criteria;
  bool passed() const;
  // criterion,quantity,value rows with 17 significant digits.
  std::string data_csv() const;
};

SuiteReport run_suite(std::string_view suite, const VerifyOptions& opts);

}  // namespace crw
