#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sppl/dual.hpp"
#include "sppl/error.hpp"
#include "sppl/term.hpp"

namespace sppl {

struct SmoothingConfig {
  double eta;  // > 0
};

template <class Num>
struct Value;

template <class Num>
struct EnvNode {
  std::string name;
  Value<Num> val;
  std::shared_ptr<const EnvNode<Num>> next;
};

template <class Num>
using EnvPtr = std::shared_ptr<const EnvNode<Num>>;

template <class Num>
struct Value {
  enum Tag { Real, Clo, Combo } tag = Real;
  Num r{};
  // closure
  std::string binder;
  const Term* body = nullptr;
  EnvPtr<Num> env;
  // weighted members (only closures or nested combos)
  std::vector<std::pair<Num, std::shared_ptr<const Value<Num>>>> members;

  static Value real(Num x) {
    Value v;
    v.tag = Real;
    v.r = std::move(x);
    return v;
  }
};

enum class EvalMode { Strict, Smoothed };

// Observation hooks used by oracles and the score estimator.
struct EvalHooks {
  std::vector<double>* guard_values = nullptr;    // every If guard, in order
  std::vector<const Term*>* slot_origins = nullptr;  // per consumed slot
};

template <class Num>
struct Evaluator {
  using Ops = ScalarOps<Num>;

  const Program& prog;
  EvalMode mode;
  std::optional<SmoothingConfig> cfg;
  std::vector<Num> theta;
  const std::vector<double>& trace;
  size_t pos = 0;
  double log_weight = 0;
  size_t nparams;
  // Score-estimator mode: value consumed at each Sample/Transform slot is
  // replaced by this precomputed constant (no partials flow through it).
  const std::vector<double>* fixed_latents = nullptr;
  EvalHooks hooks;

  Evaluator(const Program& p, EvalMode m, std::optional<SmoothingConfig> c,
            std::vector<Num> th, const std::vector<double>& tr)
      : prog(p), mode(m), cfg(c), theta(std::move(th)), trace(tr),
        nparams(p.params.size()) {}

  Num lift(double x) const { return Ops::lift(x, nparams); }

  double next_sample(Dist d, const Term* origin) {
    if (pos >= trace.size())
      throw LangError("trace length mismatch", "trace exhausted before all samples were drawn");
    double s = trace[pos++];
    log_weight += log_pdf(d, s);
    if (hooks.slot_origins) hooks.slot_origins->push_back(origin);
    return s;
  }

  static const Num& as_real(const Value<Num>& v, const char* what) {
    if (v.tag != Value<Num>::Real)
      throw LangError("ill-typed", std::string(what) + " applied to a function value");
    return v.r;
  }

  Value<Num> lookup(const EnvPtr<Num>& env, const std::string& n) {
    for (const EnvNode<Num>* e = env.get(); e; e = e->next.get())
      if (e->name == n) return e->val;
    throw LangError("ill-typed", "unbound variable '" + n + "' at runtime");
  }

  Value<Num> combine2(const Num& w1, const Value<Num>& v1, const Num& w2,
                      const Value<Num>& v2) {
    if ((v1.tag == Value<Num>::Real) != (v2.tag == Value<Num>::Real))
      throw LangError("type mismatch in combination",
                      "cannot combine a real with a function value");
    if (v1.tag == Value<Num>::Real)
      return Value<Num>::real(
          Ops::add(Ops::mul(w1, v1.r), Ops::mul(w2, v2.r)));
    Value<Num> out;
    out.tag = Value<Num>::Combo;
    auto push = [&](const Num& w, const Value<Num>& v) {
      if (v.tag == Value<Num>::Combo) {
        for (const auto& [mw, mv] : v.members)
          out.members.emplace_back(Ops::mul(w, mw), mv);
      } else {
        out.members.emplace_back(w, std::make_shared<Value<Num>>(v));
      }
    };
    push(w1, v1);
    push(w2, v2);
    return out;
  }

  Value<Num> apply(const Value<Num>& f, const Value<Num>& a) {
    switch (f.tag) {
      case Value<Num>::Real:
        throw LangError("ill-typed", "applying a non-function value");
      case Value<Num>::Clo: {
        auto env2 = std::make_shared<EnvNode<Num>>(
            EnvNode<Num>{f.binder, a, f.env});
        return eval(f.body, env2);
      }
      case Value<Num>::Combo: {
        // Members have safe types, so applying them draws no samples.
        Value<Num> acc;
        bool first = true;
        for (const auto& [w, m] : f.members) {
          Value<Num> r = apply(*m, a);
          if (first) {
            if (r.tag == Value<Num>::Real) {
              acc = Value<Num>::real(Ops::mul(w, r.r));
            } else {
              acc.tag = Value<Num>::Combo;
              if (r.tag == Value<Num>::Combo) {
                for (const auto& [mw, mv] : r.members)
                  acc.members.emplace_back(Ops::mul(w, mw), mv);
              } else {
                acc.members.emplace_back(w, std::make_shared<Value<Num>>(r));
              }
            }
            first = false;
          } else if (acc.tag == Value<Num>::Real) {
            acc.r = Ops::add(acc.r, Ops::mul(w, as_real(r, "combination")));
          } else {
            if (r.tag == Value<Num>::Combo) {
              for (const auto& [mw, mv] : r.members)
                acc.members.emplace_back(Ops::mul(w, mw), mv);
            } else {
              acc.members.emplace_back(w, std::make_shared<Value<Num>>(r));
            }
          }
        }
        return acc;
      }
    }
    throw LangError("ill-typed", "unreachable");
  }

  Num sigma(const Num& x) {
    if (!cfg)
      throw LangError("ill-typed",
                      "sigma node evaluated without a smoothing configuration "
                      "(pass --eta)");
    return Ops::sigma(x, cfg->eta);
  }

  Value<Num> eval(const Term* t, const EnvPtr<Num>& env) {
    switch (t->kind) {
      case TermKind::Const:
        return Value<Num>::real(lift(t->value));
      case TermKind::Param:
        return Value<Num>::real(theta[t->index]);
      case TermKind::Var:
        return lookup(env, t->name);
      case TermKind::Add:
      case TermKind::Mul: {
        Value<Num> a = eval(t->ch[0].get(), env);
        Value<Num> b = eval(t->ch[1].get(), env);
        const Num& x = as_real(a, "arithmetic");
        const Num& y = as_real(b, "arithmetic");
        return Value<Num>::real(t->kind == TermKind::Add ? Ops::add(x, y)
                                                         : Ops::mul(x, y));
      }
      case TermKind::Neg:
        return Value<Num>::real(
            Ops::neg(as_real(eval(t->ch[0].get(), env), "negation")));
      case TermKind::Inv: {
        Value<Num> a = eval(t->ch[0].get(), env);
        const Num& x = as_real(a, "inverse");
        if (Ops::value(x) <= 0)
          throw LangError("domain violation", "inv of a nonpositive value");
        return Value<Num>::real(Ops::inv(x));
      }
      case TermKind::Exp:
        return Value<Num>::real(
            Ops::exp_(as_real(eval(t->ch[0].get(), env), "exp")));
      case TermKind::Log: {
        Value<Num> a = eval(t->ch[0].get(), env);
        const Num& x = as_real(a, "log");
        if (Ops::value(x) <= 0)
          throw LangError("domain violation", "log of a nonpositive value");
        return Value<Num>::real(Ops::log_(x));
      }
      case TermKind::SigmaEta:
        return Value<Num>::real(
            sigma(as_real(eval(t->ch[0].get(), env), "sigma")));
      case TermKind::Sample: {
        double s = next_sample(t->dist, t);
        return Value<Num>::real(lift(s));
      }
      case TermKind::Transform: {
        size_t slot = pos;
        double s = next_sample(t->dist, t);
        if (fixed_latents)
          return Value<Num>::real(lift((*fixed_latents)[slot]));
        Value<Num> f = eval(t->ch[0].get(), env);
        return apply(f, Value<Num>::real(lift(s)));
      }
      case TermKind::If: {
        Value<Num> g = eval(t->ch[0].get(), env);
        const Num& gv = as_real(g, "guard");
        if (hooks.guard_values) hooks.guard_values->push_back(Ops::value(gv));
        // Both branches always consume their sub-traces (eager semantics).
        Value<Num> vt = eval(t->ch[1].get(), env);
        Value<Num> ve = eval(t->ch[2].get(), env);
        if (mode == EvalMode::Strict)
          return Ops::value(gv) < 0 ? vt : ve;
        Num w1 = sigma(Ops::neg(gv));
        Num w2 = sigma(gv);
        return combine2(w1, vt, w2, ve);
      }
      case TermKind::Lam: {
        Value<Num> v;
        v.tag = Value<Num>::Clo;
        v.binder = t->name;
        v.body = t->ch[0].get();
        v.env = env;
        return v;
      }
      case TermKind::App: {
        Value<Num> f = eval(t->ch[0].get(), env);
        Value<Num> a = eval(t->ch[1].get(), env);
        return apply(f, a);
      }
      case TermKind::Times:
      case TermKind::Pow: {
        // Evaluate the operand arity times (fresh samples each time) and
        // fold right-nested, exactly like the desugared chain.
        std::vector<Value<Num>> vs;
        vs.reserve(t->arity);
        for (long i = 0; i < t->arity; ++i)
          vs.push_back(eval(t->ch[0].get(), env));
        Num acc = as_real(vs.back(), "arithmetic");
        for (long i = t->arity - 2; i >= 0; --i) {
          const Num& x = as_real(vs[i], "arithmetic");
          acc = t->kind == TermKind::Times ? Ops::add(x, acc) : Ops::mul(x, acc);
        }
        return Value<Num>::real(acc);
      }
    }
    throw LangError("ill-typed", "unreachable node");
  }

  Value<Num> run() {
    Value<Num> v = eval(prog.body.get(), nullptr);
    if (pos != trace.size())
      throw LangError("trace length mismatch",
                      "trace has " + std::to_string(trace.size()) +
                          " samples but evaluation consumed " +
                          std::to_string(pos));
    return v;
  }
};

template <class Num>
std::vector<Num> lift_params(const Program& p, const std::vector<double>& theta,
                             bool seed_partials) {
  if (theta.size() != p.params.size())
    throw LangError("ill-typed", "wrong number of parameters");
  std::vector<Num> out;
  out.reserve(theta.size());
  for (size_t i = 0; i < theta.size(); ++i) {
    if constexpr (std::is_same_v<Num, Dual>) {
      out.push_back(seed_partials ? Dual::seeded(theta[i], theta.size(), i)
                                  : Dual(theta[i], theta.size()));
    } else {
      (void)seed_partials;
      out.push_back(theta[i]);
    }
  }
  return out;
}

// Public entry points (double-valued).
Value<double> eval_measurable(const Program& p, const std::vector<double>& theta,
                              const std::vector<double>& trace,
                              const std::optional<SmoothingConfig>& cfg = {},
                              EvalHooks hooks = {});
Value<double> eval_smoothed(const Program& p, const std::vector<double>& theta,
                            const std::vector<double>& trace,
                            const SmoothingConfig& cfg, EvalHooks hooks = {});

double sigma_eta(double x, const SmoothingConfig& cfg);

// Pointwise weighted combination at safe types (exposed for tests).
Value<double> combine_safe(double w1, const Value<double>& v1, double w2,
                           const Value<double>& v2);

// Applies a closure/combo value of safe type to an argument (no samples drawn).
Value<double> apply_safe(const Program& p, const std::vector<double>& theta,
                         const std::optional<SmoothingConfig>& cfg,
                         const Value<double>& f, const Value<double>& a);

// Operational big-step evaluator: an independent substitution-based route.
struct OpResult {
  TermPtr value;  // Const or Lam
  double weight;
  double log_weight;
};
OpResult eval_operational(const Program& p, const std::vector<double>& theta,
                          const std::vector<double>& trace);

}  // namespace sppl
