#pragma once

#include <string>
#include <vector>

namespace varbif::testing {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  /// Deterministic evidence lines (no timings).
  std::vector<std::string> details;
  double seconds = 0.0;
};

struct SuiteOptions {
  unsigned long long seed = 1;
  int workers = 1;
};

/// Criteria 1-9.
std::vector<CriterionResult> run_criteria(const SuiteOptions& options);
/// Criteria 1-9 followed by criterion 10, which repeats 1-9 and compares the
/// rendered outputs byte for byte.
std::vector<CriterionResult> run_acceptance(const SuiteOptions& options);

/// One summary line: "criterion N PASS|FAIL title".
std::string summary_line(const CriterionResult& result);
/// Summary line followed by indented detail lines.
std::string render(const CriterionResult& result);

}  // namespace varbif::testing
