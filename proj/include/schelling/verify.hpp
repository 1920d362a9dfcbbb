#pragma once

#include <string>
#include <vector>

namespace schelling {

struct CriterionResult {
  std::string id;    // "AC01".."AC14"
  std::string name;  // short family slug, usable as an --only filter
  bool pass = false;
  double seconds = 0.0;
  std::string details;
};

// Runs the acceptance criteria whose id or name contains `only`
// (case-insensitive; empty runs everything). Results in id order.
std::vector<CriterionResult> run_acceptance_list(const std::string& only);

// Prints one PASS/FAIL line per criterion; returns 1 if any failed or the
// filter matched nothing.
int run_acceptance(const std::string& only);

}  // namespace schelling
