#include "sppl/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "sppl/error.hpp"

namespace sppl {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / v.size();
}

double variance_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean_of(v), s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

AdamConfig adam_for(const ExperimentConfig& cfg, const EstimatorSpec& spec) {
  AdamConfig a = cfg.adam;
  a.eta = spec.eta;
  return a;
}

struct Objective {
  double measurable, smoothed;
};

Objective checkpoint_objective(const Model& m, const std::vector<double>& theta,
                               const ExperimentConfig& cfg, int checkpoint) {
  double acc_m = 0, acc_s = 0;
  for (int i = 0; i < cfg.elbo_samples; ++i) {
    Rng rng = substream(cfg.elbo_seed, static_cast<uint64_t>(checkpoint),
                        static_cast<uint64_t>(i));
    std::vector<double> tr = draw_trace(m.sigma, rng);
    acc_m += eval_measurable(m.program, theta, tr).r;
    acc_s += eval_smoothed(m.program, theta, tr, cfg.report_eta).r;
  }
  return {acc_m / cfg.elbo_samples, acc_s / cfg.elbo_samples};
}

}  // namespace

EstimatorSpec parse_estimator_spec(const std::string& s) {
  if (s == "reparam") return {EstKind::Reparam, std::nullopt, s};
  if (s == "score") return {EstKind::Score, std::nullopt, s};
  if (s.rfind("smooth", 0) == 0) {
    auto colon = s.find(':');
    if (colon == std::string::npos)
      throw LangError("unknown estimator", s + " (smooth needs smooth:ETA)");
    double eta = std::stod(s.substr(colon + 1));
    if (!(eta > 0)) throw LangError("unknown estimator", "eta must be > 0");
    return {EstKind::Smooth, SmoothingConfig{eta}, s};
  }
  throw LangError("unknown estimator", s);
}

void elbo_experiment(const Model& m, const std::vector<double>& theta0,
                     const std::vector<EstimatorSpec>& specs,
                     const ExperimentConfig& cfg, ExperimentReport& out) {
  for (const auto& spec : specs) {
    Trajectory tr = run_adam(m, theta0, adam_for(cfg, spec), spec.kind, cfg.par);
    int ncheck = 0;
    for (int it = 0; it <= cfg.adam.iters; it += cfg.checkpoint_every) {
      if (static_cast<size_t>(it) >= tr.thetas.size()) break;  // diverged early
      Objective obj = checkpoint_objective(m, tr.thetas[it], cfg, ncheck);
      out.elbo.push_back({spec.label, it, obj.measurable, obj.smoothed});
      ++ncheck;
    }
    out.finals.emplace_back(spec.label, tr.thetas.back());
  }
}

std::vector<VarianceRow> variance_report(
    const Model& m, const std::vector<std::vector<double>>& checkpoints,
    const std::vector<EstimatorSpec>& specs, int K, uint64_t seed,
    Parallelism par) {
  if (K < 2) throw LangError("ill-typed", "variance report needs K >= 2");
  std::vector<VarianceRow> rows;
  for (const auto& spec : specs) {
    double acc_comp = 0, acc_norm = 0;
    for (size_t c = 0; c < checkpoints.size(); ++c) {
      EstimatorConfig ec{spec.kind, K, spec.eta, par};
      std::vector<std::vector<double>> samples;
      estimate_gradient(m, ec, checkpoints[c], seed, c, &samples);
      size_t np = checkpoints[c].size();
      double comp = 0;
      std::vector<double> norms, column(samples.size());
      for (size_t j = 0; j < np; ++j) {
        for (size_t i = 0; i < samples.size(); ++i) column[i] = samples[i][j];
        comp += variance_of(column);
      }
      for (const auto& g : samples) {
        double n2 = 0;
        for (double x : g) n2 += x * x;
        norms.push_back(std::sqrt(n2));
      }
      acc_comp += comp / np;
      acc_norm += variance_of(norms);
    }
    rows.push_back({spec.label, acc_comp / checkpoints.size(),
                    acc_norm / checkpoints.size()});
  }
  return rows;
}

std::vector<WnvRow> work_normalised_variance(const Model& m,
                                             const std::vector<double>& theta0,
                                             const std::vector<EstimatorSpec>& specs,
                                             double time_budget_s,
                                             const ExperimentConfig& cfg) {
  auto vars = variance_report(m, {theta0}, specs, cfg.variance_samples,
                              cfg.elbo_seed, Parallelism::Serial);

  std::vector<WnvRow> rows;
  for (size_t si = 0; si < specs.size(); ++si) {
    const auto& spec = specs[si];
    AdamConfig a = adam_for(cfg, spec);
    EstimatorConfig ec{spec.kind, a.mc_samples, a.eta, Parallelism::Serial};
    std::vector<double> theta = project_domain(m, theta0);
    std::vector<double> mom(theta.size(), 0.0), vel(theta.size(), 0.0);
    long iters = 0;
    auto t0 = std::chrono::steady_clock::now();
    auto budget = std::chrono::duration<double>(time_budget_s);
    while (std::chrono::steady_clock::now() - t0 < budget) {
      ++iters;
      auto g = estimate_gradient(m, ec, theta, a.seed, iters);
      double b1k = 1.0 - std::pow(a.beta1, iters);
      double b2k = 1.0 - std::pow(a.beta2, iters);
      for (size_t i = 0; i < theta.size(); ++i) {
        mom[i] = a.beta1 * mom[i] + (1 - a.beta1) * g[i];
        vel[i] = a.beta2 * vel[i] + (1 - a.beta2) * g[i] * g[i];
        theta[i] -= a.lr * (mom[i] / b1k) / (std::sqrt(vel[i] / b2k) + a.epsilon);
      }
      theta = project_domain(m, theta);
    }
    rows.push_back({spec.label, iters, 1.0 / iters, vars[si].avg_component_variance, 0.0});
  }

  // Normalise costs so that score's cost is 1 (first estimator if absent).
  double base = rows.front().cost;
  for (size_t si = 0; si < specs.size(); ++si)
    if (specs[si].kind == EstKind::Score) base = rows[si].cost;
  for (auto& r : rows) {
    r.cost /= base;
    r.wnv = r.cost * r.variance;
  }
  return rows;
}

std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw LangError("io error", "cannot open " + path);
  return f;
}

}  // namespace

void write_elbo_csv(const std::string& path, const std::vector<ElboRow>& rows) {
  auto f = open_csv(path);
  f << "estimator,iter,objective_measurable,objective_smoothed\n";
  for (const auto& r : rows)
    f << r.estimator << ',' << r.iter << ','
      << format_g17(r.objective_measurable) << ','
      << format_g17(r.objective_smoothed) << '\n';
}

void write_variance_csv(const std::string& path,
                        const std::vector<VarianceRow>& rows) {
  auto f = open_csv(path);
  f << "estimator,avg_component_variance,l2_norm_variance\n";
  for (const auto& r : rows)
    f << r.estimator << ',' << format_g17(r.avg_component_variance) << ','
      << format_g17(r.l2_norm_variance) << '\n';
}

void write_wnv_csv(const std::string& path, const std::vector<WnvRow>& rows) {
  auto f = open_csv(path);
  f << "estimator,iterations,cost,variance,wnv\n";
  for (const auto& r : rows)
    f << r.estimator << ',' << r.iterations << ',' << format_g17(r.cost) << ','
      << format_g17(r.variance) << ',' << format_g17(r.wnv) << '\n';
}

void write_trajectory_csv(const std::string& path, const Trajectory& tr) {
  auto f = open_csv(path);
  size_t np = tr.thetas.empty() ? 0 : tr.thetas.front().size();
  f << "iter";
  for (size_t j = 1; j <= np; ++j) f << ",theta_" << j;
  f << ",grad_norm,elapsed_ns\n";
  for (size_t k = 0; k < tr.thetas.size(); ++k) {
    f << k;
    for (double x : tr.thetas[k]) f << ',' << format_g17(x);
    f << ',' << format_g17(k == 0 ? 0.0 : tr.grad_norms[k - 1]) << ','
      << (k == 0 ? 0LL : tr.elapsed_ns[k - 1]) << '\n';
  }
}

}  // namespace sppl
