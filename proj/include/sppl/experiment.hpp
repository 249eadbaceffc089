#pragma once

#include <string>
#include <vector>

#include "sppl/optimize.hpp"

namespace sppl {

// One estimator under test, e.g. "smooth:0.15", "reparam", "score".
struct EstimatorSpec {
  EstKind kind;
  std::optional<SmoothingConfig> eta;
  std::string label;
};

EstimatorSpec parse_estimator_spec(const std::string& s);

struct ExperimentConfig {
  AdamConfig adam;
  int checkpoint_every = 100;
  int elbo_samples = 200;  // objective samples per checkpoint
  int variance_samples = 200;
  SmoothingConfig report_eta{0.15};  // for the objective_smoothed column
  uint64_t elbo_seed = 0x0e1b05eedULL;
  Parallelism par = Parallelism::Serial;
};

struct ElboRow {
  std::string estimator;
  int iter;
  double objective_measurable;
  double objective_smoothed;
};

struct VarianceRow {
  std::string estimator;
  double avg_component_variance;
  double l2_norm_variance;
};

struct WnvRow {
  std::string estimator;
  long iterations;  // completed within the time budget
  double cost;      // 1/iterations, normalised so score's cost is 1
  double variance;  // avg component variance at theta0
  double wnv;       // cost * variance
};

struct ExperimentReport {
  std::vector<ElboRow> elbo;
  std::vector<VarianceRow> variance;
  std::vector<WnvRow> wnv;
  // final parameters per estimator, in spec order
  std::vector<std::pair<std::string, std::vector<double>>> finals;
};

// Runs each estimator's Adam optimisation and estimates the objective at
// every checkpoint (iterations 0, 100, ...) with common random numbers:
// checkpoint traces are keyed on (checkpoint index, sample index) only, so
// every estimator sees the same evaluation noise. Appends to `out` as rows
// are produced so partial results survive a failure.
void elbo_experiment(const Model& m, const std::vector<double>& theta0,
                     const std::vector<EstimatorSpec>& specs,
                     const ExperimentConfig& cfg, ExperimentReport& out);

// Gradient-noise statistics: at each checkpoint theta, K gradient samples
// per estimator (common random numbers across estimators); reports the
// component-wise variance averaged over components and the variance of the
// gradient L2 norm, each averaged over checkpoints.
std::vector<VarianceRow> variance_report(
    const Model& m, const std::vector<std::vector<double>>& checkpoints,
    const std::vector<EstimatorSpec>& specs, int K, uint64_t seed,
    Parallelism par = Parallelism::Serial);

// Measures how many optimisation iterations each estimator completes in the
// budget (single-threaded), sets cost = 1/iterations normalised to score's
// cost, and reports WNV = cost * variance (variance taken at theta0).
std::vector<WnvRow> work_normalised_variance(const Model& m,
                                             const std::vector<double>& theta0,
                                             const std::vector<EstimatorSpec>& specs,
                                             double time_budget_s,
                                             const ExperimentConfig& cfg);

// CSV output; header row, floats with 17 significant digits.
void write_elbo_csv(const std::string& path, const std::vector<ElboRow>& rows);
void write_variance_csv(const std::string& path,
                        const std::vector<VarianceRow>& rows);
void write_wnv_csv(const std::string& path, const std::vector<WnvRow>& rows);
void write_trajectory_csv(const std::string& path, const Trajectory& tr);

std::string format_g17(double x);

}  // namespace sppl
