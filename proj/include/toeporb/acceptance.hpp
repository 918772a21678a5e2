#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace toeporb::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Runs the full acceptance suite, one pass/fail line per criterion.
/// Returns the number of failed criteria.
int run_acceptance(std::ostream& os);

std::vector<CriterionResult> run_all();

}  // namespace toeporb::acceptance
