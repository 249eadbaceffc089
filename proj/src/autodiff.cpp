#include "sppl/autodiff.hpp"

namespace sppl {

namespace {

GradResult run_dual(const Program& p, const std::vector<double>& theta,
                    const std::vector<double>& trace, EvalMode mode,
                    const std::optional<SmoothingConfig>& cfg) {
  Evaluator<Dual> ev(p, mode, cfg, lift_params<Dual>(p, theta, true), trace);
  Value<Dual> v = ev.run();
  if (v.tag != Value<Dual>::Real)
    throw LangError("ill-typed", "gradient of a function-valued program");
  return GradResult{v.r.v, v.r.d};
}

}  // namespace

GradResult grad_smoothed(const Program& p, const std::vector<double>& theta,
                         const std::vector<double>& trace,
                         const SmoothingConfig& cfg) {
  return run_dual(p, theta, trace, EvalMode::Smoothed, cfg);
}

GradResult grad_measurable(const Program& p, const std::vector<double>& theta,
                           const std::vector<double>& trace,
                           const std::optional<SmoothingConfig>& cfg) {
  return run_dual(p, theta, trace, EvalMode::Strict, cfg);
}

std::vector<double> finite_diff_grad(const Program& p,
                                     const std::vector<double>& theta,
                                     const std::vector<double>& trace,
                                     const std::optional<SmoothingConfig>& cfg,
                                     double h) {
  auto value_at = [&](const std::vector<double>& th) {
    Value<double> v = cfg ? eval_smoothed(p, th, trace, *cfg)
                          : eval_measurable(p, th, trace);
    if (v.tag != Value<double>::Real)
      throw LangError("ill-typed", "gradient of a function-valued program");
    return v.r;
  };
  std::vector<double> g(theta.size());
  for (size_t i = 0; i < theta.size(); ++i) {
    std::vector<double> plus = theta, minus = theta;
    plus[i] += h;
    minus[i] -= h;
    if (p.params[i].second == BaseType::Rpos && minus[i] <= 0)
      throw LangError("domain violation near boundary",
                      "finite difference step leaves the preal domain");
    g[i] = (value_at(plus) - value_at(minus)) / (2 * h);
  }
  return g;
}

Dual dual_apply(const std::string& op, const std::vector<Dual>& args,
                const std::optional<SmoothingConfig>& cfg) {
  auto arity = [&](size_t n) {
    if (args.size() != n)
      throw LangError("ill-typed", "wrong arity for '" + op + "'");
  };
  if (op == "add") {
    arity(2);
    return args[0] + args[1];
  }
  if (op == "mul") {
    arity(2);
    return args[0] * args[1];
  }
  if (op == "neg") {
    arity(1);
    return -args[0];
  }
  if (op == "inv") {
    arity(1);
    if (args[0].v <= 0)
      throw LangError("domain violation", "inv of a nonpositive value");
    return dual_inv(args[0]);
  }
  if (op == "exp") {
    arity(1);
    return dual_exp(args[0]);
  }
  if (op == "log") {
    arity(1);
    if (args[0].v <= 0)
      throw LangError("domain violation", "log of a nonpositive value");
    return dual_log(args[0]);
  }
  if (op == "sigma") {
    arity(1);
    if (!cfg) throw LangError("ill-typed", "sigma needs a smoothing config");
    return dual_sigma_eta(args[0], cfg->eta);
  }
  throw LangError("ill-typed", "unknown primitive '" + op + "'");
}

}  // namespace sppl
