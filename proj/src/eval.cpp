#include "sppl/eval.hpp"

#include <cmath>

#include "sppl/ast_ops.hpp"

namespace sppl {

Value<double> eval_measurable(const Program& p, const std::vector<double>& theta,
                              const std::vector<double>& trace,
                              const std::optional<SmoothingConfig>& cfg,
                              EvalHooks hooks) {
  Evaluator<double> ev(p, EvalMode::Strict, cfg,
                       lift_params<double>(p, theta, false), trace);
  ev.hooks = hooks;
  return ev.run();
}

Value<double> eval_smoothed(const Program& p, const std::vector<double>& theta,
                            const std::vector<double>& trace,
                            const SmoothingConfig& cfg, EvalHooks hooks) {
  Evaluator<double> ev(p, EvalMode::Smoothed, cfg,
                       lift_params<double>(p, theta, false), trace);
  ev.hooks = hooks;
  return ev.run();
}

double sigma_eta(double x, const SmoothingConfig& cfg) {
  return sigmoid(x / cfg.eta);
}

Value<double> combine_safe(double w1, const Value<double>& v1, double w2,
                           const Value<double>& v2) {
  if (w1 < 0 || w1 > 1 || w2 < 0 || w2 > 1 ||
      std::fabs(w1 + w2 - 1.0) > 1e-12)
    throw LangError("type mismatch in combination",
                    "weights must lie in [0,1] and sum to 1");
  std::vector<double> empty;
  Program dummy;
  Evaluator<double> ev(dummy, EvalMode::Smoothed, SmoothingConfig{1.0}, {},
                       empty);
  return ev.combine2(w1, v1, w2, v2);
}

Value<double> apply_safe(const Program& p, const std::vector<double>& theta,
                         const std::optional<SmoothingConfig>& cfg,
                         const Value<double>& f, const Value<double>& a) {
  std::vector<double> empty;
  Evaluator<double> ev(p, cfg ? EvalMode::Smoothed : EvalMode::Strict, cfg,
                       lift_params<double>(p, theta, false), empty);
  return ev.apply(f, a);
}

namespace {

// Substitution-based big-step semantics; values are Const or Lam terms.
struct OpEval {
  const Program& prog;
  const std::vector<double>& theta;
  const std::vector<double>& trace;
  size_t pos = 0;
  double log_weight = 0;

  double next(Dist d) {
    if (pos >= trace.size())
      throw LangError("trace length mismatch", "trace exhausted");
    double s = trace[pos++];
    log_weight += log_pdf(d, s);
    return s;
  }

  static double as_const(const TermPtr& v, const char* what) {
    if (v->kind != TermKind::Const)
      throw LangError("ill-typed", std::string(what) + " of a function value");
    return v->value;
  }

  TermPtr step(const TermPtr& t) {
    switch (t->kind) {
      case TermKind::Const:
      case TermKind::Lam:
        return t;
      case TermKind::Param:
        return mk_const(theta[t->index]);
      case TermKind::Var:
        throw LangError("ill-typed", "open term in operational evaluation");
      case TermKind::Add:
      case TermKind::Mul: {
        double a = as_const(step(t->ch[0]), "arithmetic");
        double b = as_const(step(t->ch[1]), "arithmetic");
        return mk_const(t->kind == TermKind::Add ? a + b : a * b);
      }
      case TermKind::Neg:
        return mk_const(-as_const(step(t->ch[0]), "negation"));
      case TermKind::Inv: {
        double a = as_const(step(t->ch[0]), "inverse");
        if (a <= 0)
          throw LangError("domain violation", "inv of a nonpositive value");
        return mk_const(1.0 / a);
      }
      case TermKind::Exp:
        return mk_const(std::exp(as_const(step(t->ch[0]), "exp")));
      case TermKind::Log: {
        double a = as_const(step(t->ch[0]), "log");
        if (a <= 0)
          throw LangError("domain violation", "log of a nonpositive value");
        return mk_const(std::log(a));
      }
      case TermKind::SigmaEta:
        throw LangError("ill-typed",
                        "operational semantics does not smooth (sigma node)");
      case TermKind::Sample:
        return mk_const(next(t->dist));
      case TermKind::Transform: {
        TermPtr f = step(t->ch[0]);
        double s = next(t->dist);
        return apply(f, mk_const(s));
      }
      case TermKind::If: {
        double g = as_const(step(t->ch[0]), "guard");
        // Both branches evaluated; weights multiply along both.
        TermPtr vt = step(t->ch[1]);
        TermPtr ve = step(t->ch[2]);
        return g < 0 ? vt : ve;
      }
      case TermKind::App: {
        TermPtr f = step(t->ch[0]);
        TermPtr a = step(t->ch[1]);
        return apply(f, a);
      }
      case TermKind::Times:
      case TermKind::Pow:
        // callers desugar first
        throw LangError("ill-typed", "operational evaluation expects desugared input");
    }
    throw LangError("ill-typed", "unreachable");
  }

  TermPtr apply(const TermPtr& f, const TermPtr& a) {
    if (f->kind != TermKind::Lam)
      throw LangError("ill-typed", "applying a non-function value");
    return step(subst_unchecked(f->ch[0], f->name, a));
  }
};

}  // namespace

OpResult eval_operational(const Program& p, const std::vector<double>& theta,
                          const std::vector<double>& trace) {
  Program d = desugar_arith(p);
  OpEval ev{d, theta, trace};
  TermPtr v = ev.step(d.body);
  if (ev.pos != trace.size())
    throw LangError("trace length mismatch", "unconsumed samples remain");
  return OpResult{v, std::exp(ev.log_weight), ev.log_weight};
}

}  // namespace sppl
