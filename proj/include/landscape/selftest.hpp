#pragma once

#include <string>
#include <vector>

#include "landscape/report.hpp"

namespace landscape {

enum class SelftestLevel { Fast, Full };

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string summary;
  Json details;
};

CriterionResult check_counterexample_gallery();                 // 1
CriterionResult check_spurious_locality(std::size_t samples);   // 2
CriterionResult check_spurious_random(int datasets);            // 3
CriterionResult check_case2_route();                            // 4
CriterionResult check_deep_linear_saddles(int instances);       // 5
CriterionResult check_decompose_near(int instances);            // 6
CriterionResult check_polynomial_identities(int samples);       // 7
CriterionResult check_gradients(int shallow, int deep);         // 8

// Fast: gallery, polynomial identities and gradient checks at reduced counts.
// Full: all eight criteria at their stated sizes.
std::vector<CriterionResult> run_selftest(SelftestLevel level);

}  // namespace landscape
