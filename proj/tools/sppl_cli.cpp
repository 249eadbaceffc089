#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sppl/ast_ops.hpp"
#include "sppl/autodiff.hpp"
#include "sppl/builtins.hpp"
#include "sppl/compile.hpp"
#include "sppl/error.hpp"
#include "sppl/eval.hpp"
#include "sppl/experiment.hpp"
#include "sppl/optimize.hpp"
#include "sppl/parser.hpp"
#include "sppl/quadrature.hpp"
#include "sppl/typecheck.hpp"

namespace {

using namespace sppl;

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw LangError("io error", "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<double> parse_csv_doubles(const std::string& s) {
  std::vector<double> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::string g17(double x) { return format_g17(x); }

std::string value_to_string(const Value<double>& v) {
  switch (v.tag) {
    case Value<double>::Real:
      return g17(v.r);
    case Value<double>::Clo:
      return "<closure>";
    case Value<double>::Combo: {
      std::string s = "<combination of " + std::to_string(v.members.size()) +
                      " closures>";
      return s;
    }
  }
  return "?";
}

int cmd_typecheck(const std::string& file, const std::string& system) {
  Program p = parse_program(read_file(file));
  InferResult r;
  System sys = System::Basic;
  if (system == "basic") {
    r = infer_basic(p);
  } else {
    if (system == "poly") sys = System::Poly;
    else if (system == "sgd") sys = System::Sgd;
    else if (system == "unif") sys = System::Unif;
    else throw LangError("unknown system", system);
    r = check_annotated(sys, p);
  }
  std::cout << "trace: " << trace_to_string(r.trace) << "\n";
  std::cout << "type: " << type_to_string(r.type, sys) << "\n";
  return 0;
}

int cmd_eval(const std::string& file, const std::vector<double>& theta,
             const std::vector<double>& trace, std::optional<double> eta,
             bool weights, bool internal) {
  Program p = parse_program(read_file(file), internal);
  std::optional<SmoothingConfig> cfg;
  if (eta) cfg = SmoothingConfig{*eta};
  std::vector<double> th = lift_params<double>(p, theta, false);
  Evaluator<double> ev(p, eta ? EvalMode::Smoothed : EvalMode::Strict, cfg, th,
                       trace);
  Value<double> v = ev.run();
  std::cout << "value: " << value_to_string(v) << "\n";
  if (weights) {
    std::cout << "weight: " << g17(std::exp(ev.log_weight)) << "\n";
    std::cout << "log_weight: " << g17(ev.log_weight) << "\n";
  }
  return 0;
}

int cmd_grad(const std::string& file, const std::vector<double>& theta,
             const std::vector<double>& trace, std::optional<double> eta,
             std::optional<double> check, bool internal) {
  Program p = parse_program(read_file(file), internal);
  std::optional<SmoothingConfig> cfg;
  if (eta) cfg = SmoothingConfig{*eta};
  GradResult r = eta ? grad_smoothed(p, theta, trace, *cfg)
                     : grad_measurable(p, theta, trace, cfg);
  std::cout << "value: " << g17(r.value) << "\n";
  std::cout << "grad:";
  for (double g : r.grad) std::cout << ' ' << g17(g);
  std::cout << "\n";
  if (check) {
    auto fd = finite_diff_grad(p, theta, trace, cfg, *check);
    double worst = 0;
    for (size_t i = 0; i < r.grad.size(); ++i) {
      double denom = std::max(std::abs(fd[i]), 1e-8);
      worst = std::max(worst, std::abs(r.grad[i] - fd[i]) / denom);
    }
    std::cout << "max_rel_dev: " << g17(worst) << "\n";
  }
  return 0;
}

int cmd_smooth(const std::string& file, const std::string& out) {
  Program p = parse_program(read_file(file));
  Program q = smooth_compile(p);
  std::ofstream f(out);
  if (!f) throw LangError("io error", "cannot open " + out);
  f << print_program(q) << "\n";
  std::cout << "conditionals: " << count_ifs(p.body) << ", nodes: "
            << count_nodes(p.body) << " -> " << count_nodes(q.body) << "\n";
  return 0;
}

int cmd_optimize(const std::string& file, const std::string& estimator,
                 const std::string& optimizer, double lr, int iters,
                 int mc_samples, std::optional<double> eta, uint64_t seed,
                 const std::string& schedule, const std::string& out,
                 const std::string& theta0_s) {
  Program p = parse_program(read_file(file));
  Model m = make_model(p);
  EstimatorSpec spec = parse_estimator_spec(
      estimator == "smooth" && eta ? "smooth:" + std::to_string(*eta)
                                   : estimator);
  std::vector<double> theta0(p.params.size(), 0.0);
  if (!theta0_s.empty()) theta0 = parse_csv_doubles(theta0_s);
  if (theta0.size() != p.params.size())
    throw LangError("ill-typed", "wrong number of initial parameters");

  Trajectory tr;
  if (optimizer == "adam") {
    AdamConfig cfg;
    cfg.lr = lr;
    cfg.iters = iters;
    cfg.mc_samples = mc_samples;
    cfg.eta = spec.eta;
    cfg.seed = seed;
    tr = run_adam(m, theta0, cfg, spec.kind);
  } else if (optimizer == "sgd") {
    StepSchedule sched;
    auto colon = schedule.find(':');
    std::string kind = schedule.substr(0, colon);
    if (colon != std::string::npos) sched.c = std::stod(schedule.substr(colon + 1));
    if (kind == "rm") sched.kind = StepSchedule::RobbinsMonro;
    else if (kind == "const") sched.kind = StepSchedule::Constant;
    else throw LangError("unknown schedule", schedule);
    EstimatorConfig ec{spec.kind, mc_samples, spec.eta, Parallelism::Serial};
    tr = run_sgd(m, theta0, sched, ec, iters, seed);
  } else {
    throw LangError("unknown optimizer", optimizer);
  }
  write_trajectory_csv(out, tr);
  std::cout << "iterations: " << tr.thetas.size() - 1
            << (tr.diverged ? " (diverged)" : "") << "\nfinal:";
  for (double x : tr.thetas.back()) std::cout << ' ' << g17(x);
  std::cout << "\n";
  return tr.diverged ? 1 : 0;
}

int cmd_bench(const std::string& model_name, const std::string& estimators,
              int iters, double lr, uint64_t seed, const std::string& out_dir,
              double wnv_budget) {
  BuiltinModel b = builtin(model_name);
  Model m = b.negate_for_bench ? make_model(negated(b.model.program)) : b.model;

  std::vector<EstimatorSpec> specs;
  std::stringstream ss(estimators);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) specs.push_back(parse_estimator_spec(item));

  ExperimentConfig cfg;
  cfg.adam = b.run;
  cfg.adam.lr = lr;
  cfg.adam.iters = iters;
  cfg.adam.seed = seed;
  if (b.run.eta) cfg.report_eta = *b.run.eta;

  ExperimentReport report;
  try {
    elbo_experiment(m, b.theta0, specs, cfg, report);
    std::vector<std::vector<double>> checkpoints;
    for (const auto& [label, th] : report.finals) checkpoints.push_back(th);
    checkpoints.push_back(b.theta0);
    report.variance = variance_report(m, checkpoints, specs,
                                      cfg.variance_samples, seed + 1);
    report.wnv = work_normalised_variance(m, b.theta0, specs, wnv_budget, cfg);
  } catch (...) {
    // flush partial results before reporting the failure
    write_elbo_csv(out_dir + "/elbo.csv", report.elbo);
    write_variance_csv(out_dir + "/variance.csv", report.variance);
    write_wnv_csv(out_dir + "/wnv.csv", report.wnv);
    throw;
  }
  write_elbo_csv(out_dir + "/elbo.csv", report.elbo);
  write_variance_csv(out_dir + "/variance.csv", report.variance);
  write_wnv_csv(out_dir + "/wnv.csv", report.wnv);
  for (const auto& [label, th] : report.finals) {
    std::cout << label << " final:";
    for (double x : th) std::cout << ' ' << g17(x);
    std::cout << "\n";
  }
  return 0;
}

int cmd_oracle(const std::string& file, const std::vector<double>& theta,
               std::optional<double> eta, bool gradient) {
  Program p = parse_program(read_file(file));
  std::optional<SmoothingConfig> cfg;
  if (eta) cfg = SmoothingConfig{*eta};
  std::cout << "expectation: " << g17(quadrature_expectation(p, theta, cfg))
            << "\n";
  if (gradient) {
    auto g = eta ? quadrature_gradient_smoothed(p, theta, *cfg)
                 : quadrature_gradient_measurable(p, theta);
    std::cout << "gradient:";
    for (double x : g) std::cout << ' ' << g17(x);
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Typed probabilistic language with smoothed semantics"};
  app.require_subcommand(1);

  std::string file, system = "basic", theta_s, trace_s, out, estimator,
              optimizer = "adam", schedule = "rm:1", model_name, estimators,
              theta0_s;
  std::optional<double> eta, check;
  bool weights = false, internal = false, gradient = false;
  double lr = 0.001, wnv_budget = 1.0;
  int iters = 5000, mc_samples = 16;
  uint64_t seed = 1;

  auto* tc = app.add_subcommand("typecheck", "Infer trace and type");
  tc->add_option("file", file)->required();
  tc->add_option("--system", system, "basic|poly|sgd|unif");

  auto* ev = app.add_subcommand("eval", "Evaluate on a fixed trace");
  ev->add_option("file", file)->required();
  ev->add_option("--theta", theta_s);
  ev->add_option("--trace", trace_s);
  ev->add_option("--eta", eta, "smoothing accuracy coefficient");
  ev->add_flag("--weights", weights, "also print the trace density weight");
  ev->add_flag("--internal", internal, "accept compiler-produced forms");

  auto* gr = app.add_subcommand("grad", "Gradient on a fixed trace");
  gr->add_option("file", file)->required();
  gr->add_option("--theta", theta_s);
  gr->add_option("--trace", trace_s);
  gr->add_option("--eta", eta);
  gr->add_option("--check", check, "finite-difference step for verification");
  gr->add_flag("--internal", internal);

  auto* sm = app.add_subcommand("smooth", "Compile conditionals away");
  sm->add_option("file", file)->required();
  sm->add_option("-o,--out", out)->required();

  auto* op = app.add_subcommand("optimize", "Stochastic optimisation");
  op->add_option("file", file)->required();
  op->add_option("--estimator", estimator, "reparam|smooth|score")->required();
  op->add_option("--optimizer", optimizer, "sgd|adam");
  op->add_option("--lr", lr);
  op->add_option("--iters", iters);
  op->add_option("--mc-samples", mc_samples);
  op->add_option("--eta", eta);
  op->add_option("--seed", seed);
  op->add_option("--schedule", schedule, "rm:c or const:g (sgd only)");
  op->add_option("--theta0", theta0_s, "initial parameters (default zeros)");
  op->add_option("--out", out)->required();

  auto* be = app.add_subcommand("bench", "Estimator comparison experiment");
  be->add_option("--model", model_name)->required();
  be->add_option("--estimators", estimators)->required();
  be->add_option("--iters", iters);
  be->add_option("--lr", lr);
  be->add_option("--seed", seed);
  be->add_option("--out", out)->required();
  be->add_option("--wnv-budget", wnv_budget, "seconds per estimator");

  auto* orc = app.add_subcommand("oracle", "Quadrature expectation");
  orc->add_option("file", file)->required();
  orc->add_option("--theta", theta_s);
  orc->add_option("--eta", eta);
  orc->add_flag("--gradient", gradient, "also print the oracle gradient");

  CLI11_PARSE(app, argc, argv);

  try {
    auto theta = parse_csv_doubles(theta_s);
    auto trace = parse_csv_doubles(trace_s);
    if (tc->parsed()) return cmd_typecheck(file, system);
    if (ev->parsed()) return cmd_eval(file, theta, trace, eta, weights, internal);
    if (gr->parsed()) return cmd_grad(file, theta, trace, eta, check, internal);
    if (sm->parsed()) return cmd_smooth(file, out);
    if (op->parsed())
      return cmd_optimize(file, estimator, optimizer, lr, iters, mc_samples,
                          eta, seed, schedule, out, theta0_s);
    if (be->parsed())
      return cmd_bench(model_name, estimators, iters, lr, seed, out, wnv_budget);
    if (orc->parsed()) return cmd_oracle(file, theta, eta, gradient);
  } catch (const sppl::LangError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
