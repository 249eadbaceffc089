#pragma once

#include <string>

namespace sppl {

enum class Dist { Normal, Exponential, Logistic, Cauchy };

// Standard parameterisations: N(0,1), Exp(rate 1), Logistic(0,1), Cauchy(0,1).
double pdf(Dist d, double x);
double log_pdf(Dist d, double x);
bool has_finite_moments(Dist d);

const char* dist_name(Dist d);
bool dist_from_name(const std::string& s, Dist& out);

}  // namespace sppl
