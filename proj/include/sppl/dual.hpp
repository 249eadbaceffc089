#pragma once

#include <cmath>
#include <vector>

#include "sppl/error.hpp"

namespace sppl {

// Numerically stable logistic sigmoid.
inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// Forward-mode dual number: value plus one partial per program parameter.
struct Dual {
  double v = 0;
  std::vector<double> d;

  Dual() = default;
  Dual(double value, size_t m) : v(value), d(m, 0.0) {}
  static Dual seeded(double value, size_t m, size_t i) {
    Dual x(value, m);
    x.d[i] = 1.0;
    return x;
  }
};

inline Dual operator+(const Dual& a, const Dual& b) {
  Dual r = a;
  r.v += b.v;
  for (size_t i = 0; i < r.d.size(); ++i) r.d[i] += b.d[i];
  return r;
}

inline Dual operator*(const Dual& a, const Dual& b) {
  Dual r(a.v * b.v, a.d.size());
  for (size_t i = 0; i < r.d.size(); ++i)
    r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}

inline Dual operator-(const Dual& a) {
  Dual r = a;
  r.v = -r.v;
  for (auto& x : r.d) x = -x;
  return r;
}

inline Dual dual_inv(const Dual& a) {
  Dual r(1.0 / a.v, a.d.size());
  double s = -1.0 / (a.v * a.v);
  for (size_t i = 0; i < r.d.size(); ++i) r.d[i] = s * a.d[i];
  return r;
}

inline Dual dual_exp(const Dual& a) {
  Dual r(std::exp(a.v), a.d.size());
  for (size_t i = 0; i < r.d.size(); ++i) r.d[i] = r.v * a.d[i];
  return r;
}

inline Dual dual_log(const Dual& a) {
  Dual r(std::log(a.v), a.d.size());
  for (size_t i = 0; i < r.d.size(); ++i) r.d[i] = a.d[i] / a.v;
  return r;
}

// sigma_eta(x) = sigmoid(x / eta); derivative sigma(1-sigma)/eta.
inline Dual dual_sigma_eta(const Dual& a, double eta) {
  double s = sigmoid(a.v / eta);
  Dual r(s, a.d.size());
  double g = s * (1.0 - s) / eta;
  for (size_t i = 0; i < r.d.size(); ++i) r.d[i] = g * a.d[i];
  return r;
}

// Scalar abstraction used by the generic evaluator.
template <class Num>
struct ScalarOps;

template <>
struct ScalarOps<double> {
  static double lift(double x, size_t) { return x; }
  static double value(double x) { return x; }
  static double add(double a, double b) { return a + b; }
  static double mul(double a, double b) { return a * b; }
  static double neg(double a) { return -a; }
  static double inv(double a) { return 1.0 / a; }
  static double exp_(double a) { return std::exp(a); }
  static double log_(double a) { return std::log(a); }
  static double sigma(double a, double eta) { return sigmoid(a / eta); }
};

template <>
struct ScalarOps<Dual> {
  static Dual lift(double x, size_t m) { return Dual(x, m); }
  static double value(const Dual& x) { return x.v; }
  static Dual add(const Dual& a, const Dual& b) { return a + b; }
  static Dual mul(const Dual& a, const Dual& b) { return a * b; }
  static Dual neg(const Dual& a) { return -a; }
  static Dual inv(const Dual& a) { return dual_inv(a); }
  static Dual exp_(const Dual& a) { return dual_exp(a); }
  static Dual log_(const Dual& a) { return dual_log(a); }
  static Dual sigma(const Dual& a, double eta) { return dual_sigma_eta(a, eta); }
};

}  // namespace sppl
