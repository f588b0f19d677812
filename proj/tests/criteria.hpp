#pragma once

#include <functional>
#include <string>
#include <vector>

namespace criteria {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  std::function<Outcome()> run;
};

Outcome gradient_correctness();
Outcome oracle_equivalence();
Outcome closed_form_loss();
Outcome invariant_suite();
Outcome end_to_end_transfer();
Outcome linear_scaling();
Outcome link_prediction();

const std::vector<Criterion>& all();

}  // namespace criteria
