#pragma once

#include <string>
#include <vector>

namespace acceptance {

struct Outcome {
  int id;
  std::string name;
  bool passed;
  std::string detail;
  double seconds;
};

Outcome oracle_equivalence();
Outcome boundary_counterexample();
Outcome dgp_convergence();
Outcome flat_convergence();
Outcome frequency_ordering();
Outcome estimator_statistics();
Outcome property_suites();

}  // namespace acceptance
