#pragma once

#include <string>
#include <vector>

namespace nvspin {

// One row of the oracle/consistency matrix printed by `validate`.
struct ValidationCheck {
  std::string name;
  double value = 0.0;      // measured deviation or quantity
  double tolerance = 0.0;  // pass bound (interpretation per check)
  bool pass = false;
  std::string detail;
};

// Fast cross-check suite: conditional frequencies, population oracle
// equivalence, block structure, SWAP semantics, integrator agreement,
// echo refocusing.  Runs in a few seconds.
std::vector<ValidationCheck> run_validation_suite();

}  // namespace nvspin
