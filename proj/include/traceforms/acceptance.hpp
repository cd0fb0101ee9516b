#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace traceforms {

/// One verification criterion of the self-test battery.
struct CriterionResult {
  std::string id;
  std::string name;
  bool pass = false;
  double measured = 0.0;  // the worst observed quantity the criterion bounds
  std::string detail;
  double seconds = 0.0;
};

/// Runs every criterion whose id or name contains `filter` (all when empty).
std::vector<CriterionResult> run_acceptance(const std::string& filter = "");

/// Prints one line per criterion plus a summary row; returns the number of
/// failures.
int print_acceptance_table(const std::vector<CriterionResult>& results,
                           std::ostream& out);

}  // namespace traceforms
