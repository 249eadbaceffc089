#include "sppl/distribution.hpp"

#include <cmath>
#include <limits>

namespace sppl {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log sqrt(2*pi)
}

double log_pdf(Dist d, double x) {
  switch (d) {
    case Dist::Normal:
      return -0.5 * x * x - kLogSqrt2Pi;
    case Dist::Exponential:
      if (x < 0) return -std::numeric_limits<double>::infinity();
      return -x;
    case Dist::Logistic: {
      // -x - 2 log(1+e^{-x}), written to stay stable for large |x|.
      double a = -std::fabs(x);
      return a - 2.0 * std::log1p(std::exp(a));
    }
    case Dist::Cauchy:
      return -std::log(M_PI * (1.0 + x * x));
  }
  return 0;  // unreachable
}

double pdf(Dist d, double x) {
  if (d == Dist::Exponential && x < 0) return 0.0;
  return std::exp(log_pdf(d, x));
}

bool has_finite_moments(Dist d) { return d != Dist::Cauchy; }

const char* dist_name(Dist d) {
  switch (d) {
    case Dist::Normal: return "normal";
    case Dist::Exponential: return "exponential";
    case Dist::Logistic: return "logistic";
    case Dist::Cauchy: return "cauchy";
  }
  return "?";
}

bool dist_from_name(const std::string& s, Dist& out) {
  if (s == "normal") out = Dist::Normal;
  else if (s == "exponential") out = Dist::Exponential;
  else if (s == "logistic") out = Dist::Logistic;
  else if (s == "cauchy") out = Dist::Cauchy;
  else return false;
  return true;
}

}  // namespace sppl
