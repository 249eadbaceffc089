#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sppl/eval.hpp"

namespace sppl {

struct GradResult {
  double value;
  std::vector<double> grad;
};

// Forward-mode gradient of the smoothed value with respect to theta.
GradResult grad_smoothed(const Program& p, const std::vector<double>& theta,
                         const std::vector<double>& trace,
                         const SmoothingConfig& cfg);

// Gradient through fixed branch selection (the biased reparameterisation
// path): conditionals pick a branch by the sign of the guard's value part
// and only that branch's partials propagate.
GradResult grad_measurable(const Program& p, const std::vector<double>& theta,
                           const std::vector<double>& trace,
                           const std::optional<SmoothingConfig>& cfg = {});

// Central finite differences; smoothed when cfg is given, measurable
// otherwise.
std::vector<double> finite_diff_grad(const Program& p,
                                     const std::vector<double>& theta,
                                     const std::vector<double>& trace,
                                     const std::optional<SmoothingConfig>& cfg,
                                     double h);

// Primitive derivative rules on dual scalars; op is one of
// add, mul, neg, inv, exp, log, sigma (sigma needs cfg).
Dual dual_apply(const std::string& op, const std::vector<Dual>& args,
                const std::optional<SmoothingConfig>& cfg = {});

}  // namespace sppl
