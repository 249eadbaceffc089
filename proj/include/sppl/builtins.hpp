#pragma once

#include <string>
#include <vector>

#include "sppl/optimize.hpp"

namespace sppl {

struct BuiltinModel {
  std::string name;
  Model model;
  std::vector<double> theta0;
  AdamConfig run;  // recommended optimizer settings
  // The bench minimizes E[program]; models whose program is the paper's
  // ELBO integrand (rather than its negation) are negated before optimizing.
  bool negate_for_bench = false;
};

// Names: example1, prop2, ex0g, nconv, textmsg-mini, xornet-mini.
BuiltinModel builtin(const std::string& name);
std::vector<std::string> builtin_names();

// The program with its body wrapped in a negation (for minimization).
Program negated(const Program& p);

}  // namespace sppl
