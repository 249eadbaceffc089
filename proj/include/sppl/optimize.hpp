#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sppl/autodiff.hpp"
#include "sppl/eval.hpp"
#include "sppl/rng.hpp"
#include "sppl/term.hpp"
#include "sppl/types.hpp"

namespace sppl {

enum class EstKind { Reparam, Smooth, Score };
enum class Parallelism { Serial, OpenMP };

struct Domain {
  double lo, hi;  // hi may be +inf (preal parameters)
};

// Per-slot variational density info for the score estimator: the latent is
// z = scale(theta) * s + offset(theta) with s drawn from dist. Null scale /
// offset stand for the constants 1 / 0 (plain sample slots).
struct ScoreSlot {
  Dist dist;
  bool is_transform = false;
  TermPtr scale, offset;
};

struct Model {
  Program program;
  TraceType sigma;
  std::vector<Domain> domains;
  std::optional<std::vector<ScoreSlot>> score_support;
};

Model make_model(const Program& p);

std::vector<double> draw_trace(const TraceType& sigma, Rng& rng);

struct EstimatorConfig {
  EstKind kind = EstKind::Smooth;
  int N = 16;
  std::optional<SmoothingConfig> cfg;  // required for Smooth
  Parallelism par = Parallelism::Serial;
};

// Mean gradient over N traces drawn from substream(seed, iter, i).
// When `samples` is given the per-sample gradients are stored there; when
// `values` is given the per-sample integrand values are stored.
std::vector<double> estimate_gradient(const Model& m, const EstimatorConfig& ec,
                                      const std::vector<double>& theta,
                                      uint64_t seed, uint64_t iter,
                                      std::vector<std::vector<double>>* samples = nullptr,
                                      std::vector<double>* values = nullptr);

// Single-sample gradient of the score estimator (exposed for tests).
GradResult score_gradient_sample(const Model& m, const std::vector<double>& theta,
                                 const std::vector<double>& trace);

std::vector<double> project_domain(const Model& m, std::vector<double> theta);

struct StepSchedule {
  enum Kind { RobbinsMonro, Constant } kind = RobbinsMonro;
  double c = 1.0;  // gamma_k = c/k, or the constant step
  double gamma(uint64_t k) const {
    return kind == RobbinsMonro ? c / static_cast<double>(k) : c;
  }
};

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int iters = 10000;
  int mc_samples = 16;
  std::optional<SmoothingConfig> eta;
  uint64_t seed = 1;
};

struct Trajectory {
  std::vector<std::vector<double>> thetas;  // length iters+1 (theta0 first)
  std::vector<double> grad_norms;           // per iteration
  std::vector<long long> elapsed_ns;        // cumulative wall clock
  bool diverged = false;
};

Trajectory run_sgd(const Model& m, const std::vector<double>& theta0,
                   const StepSchedule& sched, const EstimatorConfig& ec,
                   int iters, uint64_t seed);

Trajectory run_adam(const Model& m, const std::vector<double>& theta0,
                    const AdamConfig& cfg, EstKind kind,
                    Parallelism par = Parallelism::Serial);

}  // namespace sppl
