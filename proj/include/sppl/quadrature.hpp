#pragma once

#include <optional>
#include <vector>

#include "sppl/eval.hpp"
#include "sppl/term.hpp"

namespace sppl {

struct QuadOptions {
  int nodes = 0;       // nodes per axis; 0 picks 8001 (1-D) / 4001 (2-D)
  double widen = 1.0;  // truncation scale factor
  bool split_jumps = true;
};

// Deterministic oracle for E_{s~D}[program(theta, s)], or the eta-smoothed
// analogue when cfg is given. Composite Simpson over truncated supports
// (normal [-10,10], logistic [-35,35], exponential [0,40], scaled by widen;
// cauchy handled by the inverse-CDF substitution). In strict mode the
// integration interval is split at guard sign changes so discontinuities
// land on segment boundaries.
double quadrature_expectation(const Program& p, const std::vector<double>& theta,
                              const std::optional<SmoothingConfig>& cfg = {},
                              const QuadOptions& opts = {});

// |E at widen  -  E at 1.5*widen|: the truncation sensitivity of the value.
double quadrature_truncation_delta(const Program& p,
                                   const std::vector<double>& theta,
                                   const std::optional<SmoothingConfig>& cfg = {},
                                   const QuadOptions& opts = {});

// Gradient of the true expectation, via a 5-point central stencil on the
// quadrature value (the expectation is smooth in theta even when the
// integrand is not).
std::vector<double> quadrature_gradient_measurable(
    const Program& p, const std::vector<double>& theta,
    const QuadOptions& opts = {}, double fd_step = 1e-3);

// Gradient of the smoothed expectation, by integrating the pathwise
// gradient of the smoothed integrand (valid: the integrand is smooth).
std::vector<double> quadrature_gradient_smoothed(
    const Program& p, const std::vector<double>& theta,
    const SmoothingConfig& cfg, const QuadOptions& opts = {});

}  // namespace sppl
