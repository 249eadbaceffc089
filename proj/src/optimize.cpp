#include "sppl/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>

#include "sppl/ast_ops.hpp"
#include "sppl/error.hpp"
#include "sppl/typecheck.hpp"

namespace sppl {

namespace {

constexpr double kPrealFloor = 1e-6;
constexpr double kRealBox = 100.0;

// Evaluates a closed, sample-free coefficient term (parameters only).
template <class Num>
Num eval_coeff(const Program& prog, const TermPtr& t,
               const std::vector<Num>& theta) {
  std::vector<double> empty;
  Evaluator<Num> ev(prog, EvalMode::Strict, std::nullopt, theta, empty);
  Value<Num> v = ev.eval(t.get(), nullptr);
  if (v.tag != Value<Num>::Real)
    throw LangError("ill-typed", "transform coefficient is not a real");
  return v.r;
}

template <class Num>
Num logpdf_num(Dist d, const Num& x) {
  using Ops = ScalarOps<Num>;
  size_t m = 0;
  if constexpr (std::is_same_v<Num, Dual>) m = x.d.size();
  auto lift = [&](double c) { return Ops::lift(c, m); };
  switch (d) {
    case Dist::Normal:
      return Ops::add(Ops::mul(lift(-0.5), Ops::mul(x, x)),
                      lift(-0.91893853320467274178));
    case Dist::Exponential:
      return Ops::neg(x);
    case Dist::Logistic: {
      // symmetric density: use -|x| - 2 log(1+e^{-|x|})
      Num y = Ops::value(x) > 0 ? Ops::neg(x) : x;
      Num l = Ops::log_(Ops::add(lift(1.0), Ops::exp_(y)));
      return Ops::add(y, Ops::mul(lift(-2.0), l));
    }
    case Dist::Cauchy: {
      Num one_plus = Ops::add(lift(1.0), Ops::mul(x, x));
      return Ops::neg(Ops::log_(Ops::mul(lift(M_PI), one_plus)));
    }
  }
  return Num{};
}

std::optional<std::vector<ScoreSlot>> derive_score_support(const Program& p,
                                                           const TraceType& sigma) {
  std::vector<ScoreSlot> slots;
  for (const auto& slot : sigma) {
    if (!slot.origin) return std::nullopt;
    ScoreSlot s;
    s.dist = slot.dist;
    if (slot.origin->kind == TermKind::Sample) {
      slots.push_back(s);
      continue;
    }
    if (slot.origin->kind != TermKind::Transform) return std::nullopt;
    if (slot.dist == Dist::Cauchy) return std::nullopt;
    auto parts = affine_parts(slot.origin->ch[0]);
    if (!parts) return std::nullopt;
    for (const TermPtr& c : {parts->scale, parts->offset}) {
      if (!c) continue;
      if (!free_vars(c).empty() || contains_sampling(c)) return std::nullopt;
    }
    s.is_transform = true;
    s.scale = parts->scale;
    s.offset = parts->offset;
    slots.push_back(s);
  }
  return slots;
}

GradResult one_sample_gradient(const Model& m, const EstimatorConfig& ec,
                               const std::vector<double>& theta,
                               const std::vector<double>& trace) {
  switch (ec.kind) {
    case EstKind::Reparam:
      return grad_measurable(m.program, theta, trace, ec.cfg);
    case EstKind::Smooth:
      if (!ec.cfg)
        throw LangError("ill-typed", "smooth estimator requires --eta");
      return grad_smoothed(m.program, theta, trace, *ec.cfg);
    case EstKind::Score:
      return score_gradient_sample(m, theta, trace);
  }
  throw LangError("ill-typed", "unreachable");
}

}  // namespace

GradResult score_gradient_sample(const Model& m, const std::vector<double>& theta,
                                 const std::vector<double>& trace) {
  if (!m.score_support)
    throw LangError("score estimator unavailable: non-affine transform",
                    "model has a transform outside the affine family");
  const auto& slots = *m.score_support;
  size_t nparams = theta.size();
  std::vector<Dual> theta_d = lift_params<Dual>(m.program, theta, true);

  // Latents and the gradient of log q_theta(z).
  std::vector<double> z(trace.size());
  std::vector<double> dlogq(nparams, 0.0);
  for (size_t j = 0; j < slots.size(); ++j) {
    const ScoreSlot& s = slots[j];
    if (!s.is_transform) {
      z[j] = trace[j];
      continue;  // fixed base density, no theta dependence
    }
    Dual scale = s.scale ? eval_coeff<Dual>(m.program, s.scale, theta_d)
                         : Dual(1.0, nparams);
    Dual offset = s.offset ? eval_coeff<Dual>(m.program, s.offset, theta_d)
                           : Dual(0.0, nparams);
    z[j] = scale.v * trace[j] + offset.v;
    if (scale.v <= 0)
      throw LangError("score estimator unavailable: non-affine transform",
                      "transform scale must be positive");
    // x = (z - offset)/scale with z held fixed
    Dual zc(z[j], nparams);
    Dual x = (zc + (-offset)) * dual_inv(scale);
    Dual term = logpdf_num<Dual>(s.dist, x) + (-dual_log(scale));
    for (size_t i = 0; i < nparams; ++i) dlogq[i] += term.d[i];
  }

  // f(theta; z fixed) and its direct theta-gradient.
  Evaluator<Dual> ev(m.program, EvalMode::Strict, std::nullopt, theta_d, trace);
  ev.fixed_latents = &z;
  Value<Dual> v = ev.run();
  if (v.tag != Value<Dual>::Real)
    throw LangError("ill-typed", "gradient of a function-valued program");

  GradResult out;
  out.value = v.r.v;
  out.grad.resize(nparams);
  for (size_t i = 0; i < nparams; ++i)
    out.grad[i] = out.value * dlogq[i] + v.r.d[i];
  return out;
}

Model make_model(const Program& p) {
  Model m;
  m.program = p;
  m.sigma = infer_basic(p).trace;
  for (const auto& [name, ty] : p.params) {
    if (ty == BaseType::Rpos)
      m.domains.push_back({kPrealFloor, std::numeric_limits<double>::infinity()});
    else
      m.domains.push_back({-kRealBox, kRealBox});
  }
  m.score_support = derive_score_support(p, m.sigma);
  return m;
}

std::vector<double> draw_trace(const TraceType& sigma, Rng& rng) {
  std::vector<double> t;
  t.reserve(sigma.size());
  for (const auto& slot : sigma) t.push_back(rng.draw(slot.dist));
  return t;
}

std::vector<double> estimate_gradient(const Model& m, const EstimatorConfig& ec,
                                      const std::vector<double>& theta,
                                      uint64_t seed, uint64_t iter,
                                      std::vector<std::vector<double>>* samples,
                                      std::vector<double>* values) {
  size_t np = theta.size();
  std::vector<GradResult> results(ec.N);
  std::exception_ptr error;

  auto work = [&](int i) {
    Rng rng = substream(seed, iter, static_cast<uint64_t>(i));
    std::vector<double> trace = draw_trace(m.sigma, rng);
    results[i] = one_sample_gradient(m, ec, theta, trace);
  };

  if (ec.par == Parallelism::OpenMP) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < ec.N; ++i) {
      try {
        work(i);
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (int i = 0; i < ec.N; ++i) work(i);
  }

  // Deterministic reduction independent of thread count.
  std::vector<double> mean(np, 0.0);
  for (int i = 0; i < ec.N; ++i) {
    for (double g : results[i].grad)
      if (!std::isfinite(g))
        throw LangError("non-finite gradient sample",
                        "gradient sample " + std::to_string(i));
    for (size_t k = 0; k < np; ++k) mean[k] += results[i].grad[k];
    if (samples) samples->push_back(results[i].grad);
    if (values) values->push_back(results[i].value);
  }
  for (double& g : mean) g /= ec.N;
  return mean;
}

std::vector<double> project_domain(const Model& m, std::vector<double> theta) {
  for (size_t i = 0; i < theta.size(); ++i) {
    theta[i] = std::max(m.domains[i].lo, std::min(m.domains[i].hi, theta[i]));
  }
  return theta;
}

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

Trajectory run_sgd(const Model& m, const std::vector<double>& theta0,
                   const StepSchedule& sched, const EstimatorConfig& ec,
                   int iters, uint64_t seed) {
  Trajectory tr;
  std::vector<double> theta = project_domain(m, theta0);
  tr.thetas.push_back(theta);
  auto t0 = std::chrono::steady_clock::now();
  for (int k = 1; k <= iters; ++k) {
    auto g = estimate_gradient(m, ec, theta, seed, k);
    double gamma = sched.gamma(k);
    for (size_t i = 0; i < theta.size(); ++i) theta[i] -= gamma * g[i];
    theta = project_domain(m, theta);
    if (!all_finite(theta)) {
      tr.diverged = true;
      break;
    }
    tr.thetas.push_back(theta);
    tr.grad_norms.push_back(norm2(g));
    tr.elapsed_ns.push_back(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now() - t0)
            .count());
  }
  return tr;
}

Trajectory run_adam(const Model& m, const std::vector<double>& theta0,
                    const AdamConfig& cfg, EstKind kind, Parallelism par) {
  EstimatorConfig ec;
  ec.kind = kind;
  ec.N = cfg.mc_samples;
  ec.cfg = cfg.eta;
  ec.par = par;

  Trajectory tr;
  std::vector<double> theta = project_domain(m, theta0);
  tr.thetas.push_back(theta);
  std::vector<double> mom(theta.size(), 0.0), vel(theta.size(), 0.0);
  auto t0 = std::chrono::steady_clock::now();
  for (int k = 1; k <= cfg.iters; ++k) {
    auto g = estimate_gradient(m, ec, theta, cfg.seed, k);
    double b1k = 1.0 - std::pow(cfg.beta1, k);
    double b2k = 1.0 - std::pow(cfg.beta2, k);
    for (size_t i = 0; i < theta.size(); ++i) {
      mom[i] = cfg.beta1 * mom[i] + (1 - cfg.beta1) * g[i];
      vel[i] = cfg.beta2 * vel[i] + (1 - cfg.beta2) * g[i] * g[i];
      double mhat = mom[i] / b1k;
      double vhat = vel[i] / b2k;
      theta[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
    theta = project_domain(m, theta);
    if (!all_finite(theta)) {
      tr.diverged = true;
      break;
    }
    tr.thetas.push_back(theta);
    tr.grad_norms.push_back(norm2(g));
    tr.elapsed_ns.push_back(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now() - t0)
            .count());
  }
  return tr;
}

}  // namespace sppl
