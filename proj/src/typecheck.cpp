#include "sppl/typecheck.hpp"

#include <algorithm>

#include "sppl/ast_ops.hpp"
#include "sppl/error.hpp"

namespace sppl {

namespace {

bool contains_if(const TermPtr& t) {
  if (t->kind == TermKind::If) return true;
  for (const auto& c : t->ch)
    if (contains_if(c)) return true;
  return false;
}

bool occurs(const TermPtr& t, const std::string& x) {
  return free_vars(t).count(x) != 0;
}

BaseType base_join(BaseType a, BaseType b) {
  return (a == BaseType::Rpos && b == BaseType::Rpos) ? BaseType::Rpos
                                                      : BaseType::R;
}

struct Checker {
  System sys;
  const Program& prog;
  int next_id = 1;
  std::set<std::string> defaulted_binders;
  std::vector<std::string> path;
  bool first_order = true;  // no function-typed binder or App argument seen

  Checker(System s, const Program& p) : sys(s), prog(p) {}

  std::string path_str() const {
    std::string s = "body";
    for (const auto& p : path) s += "." + p;
    return s;
  }

  [[noreturn]] void err(const char* kind, const std::string& msg) {
    throw LangError(kind, msg, path_str());
  }

  struct Scope {
    Checker& c;
    Scope(Checker& ck, std::string seg) : c(ck) {
      c.path.push_back(std::move(seg));
    }
    ~Scope() { c.path.pop_back(); }
  };

  Ann ann0() const { return Ann{}; }  // e=0 / (false, {})

  TypePtr hint_type(const TypeHint& h) const {
    Ann a;
    if (h.e) a.e = *h.e;
    if (h.g) a.g = *h.g;
    if (h.deps) a.deps = std::set<int>(h.deps->begin(), h.deps->end());
    return mk_base(h.base, a);
  }

  TraceSlot fresh_slot(Dist d, const Term* origin) {
    return TraceSlot{next_id++, d, origin};
  }

  // Refresh the slot ids of a function type's trace when it is instantiated
  // at an application, renaming dependency references in the result type.
  TypePtr remap_type(const TypePtr& t, const std::map<int, int>& m) {
    if (t->is_fun) {
      auto arg = remap_type(t->arg, m);
      auto res = remap_type(t->res, m);
      if (arg == t->arg && res == t->res) return t;
      return mk_fun(arg, t->trace, res);
    }
    if (t->ann.deps.empty()) return t;
    Ann a = t->ann;
    std::set<int> nd;
    for (int id : a.deps) {
      auto it = m.find(id);
      nd.insert(it == m.end() ? id : it->second);
    }
    a.deps = std::move(nd);
    return mk_base(t->base, a);
  }

  bool safe_ann_ok(const TypePtr& t) const {
    // Under the sgd system a safe type must carry annotation 0 throughout.
    if (sys != System::Sgd) return true;
    if (!t->is_fun) return t->ann.e == 0;
    return safe_ann_ok(t->arg) && safe_ann_ok(t->res);
  }

  TypePtr join_branches(const TypePtr& t1, const TypePtr& t2) {
    if (t1->is_fun != t2->is_fun)
      err("branch not safe type", "conditional branches have incompatible types");
    if (t1->is_fun) {
      if (!same_dists(t1->trace, t2->trace))
        err("branch not safe type", "branch function traces differ");
      auto arg = meet_args(t1->arg, t2->arg);
      auto res = join_branches(t1->res, t2->res);
      return mk_fun(arg, t1->trace, res);
    }
    Ann a;
    switch (sys) {
      case System::Basic:
      case System::Poly:
        break;
      case System::Sgd:
        if (t1->ann.e != t2->ann.e) {
          if (t1->base == BaseType::Rpos && t2->base == BaseType::Rpos)
            a.e = std::max(t1->ann.e, t2->ann.e);
          else
            err("annotation mismatch", "branch annotations disagree");
        } else {
          a.e = t1->ann.e;
        }
        break;
      case System::Unif:
        a.g = t1->ann.g && t2->ann.g;
        std::set_union(t1->ann.deps.begin(), t1->ann.deps.end(),
                       t2->ann.deps.begin(), t2->ann.deps.end(),
                       std::inserter(a.deps, a.deps.begin()));
        break;
    }
    return mk_base(base_join(t1->base, t2->base), a);
  }

  TypePtr meet_args(const TypePtr& t1, const TypePtr& t2) {
    if (t1->is_fun != t2->is_fun)
      err("branch not safe type", "conditional branches have incompatible types");
    if (t1->is_fun) {
      if (!same_dists(t1->trace, t2->trace))
        err("branch not safe type", "branch function traces differ");
      return mk_fun(join_branches(t1->arg, t2->arg), t1->trace,
                    meet_args(t1->res, t2->res));
    }
    // the meet of R and Rpos is Rpos (argument positions are contravariant)
    BaseType b = (t1->base == BaseType::Rpos || t2->base == BaseType::Rpos)
                     ? BaseType::Rpos
                     : BaseType::R;
    Ann a;
    if (sys == System::Sgd) {
      if (t1->ann.e != t2->ann.e)
        err("annotation mismatch", "branch argument annotations disagree");
      a.e = t1->ann.e;
    } else if (sys == System::Unif) {
      a.g = t1->ann.g || t2->ann.g;
      std::set_intersection(t1->ann.deps.begin(), t1->ann.deps.end(),
                            t2->ann.deps.begin(), t2->ann.deps.end(),
                            std::inserter(a.deps, a.deps.begin()));
    }
    return mk_base(b, a);
  }

  using Ctx = std::map<std::string, TypePtr>;

  InferResult infer(const Ctx& ctx, const TermPtr& t) {
    switch (t->kind) {
      case TermKind::Const: {
        BaseType b = t->value > 0 ? BaseType::Rpos : BaseType::R;
        return {{}, mk_base(b, ann0())};
      }
      case TermKind::Param: {
        if (t->index < 0 || t->index >= (int)prog.params.size())
          err("ill-typed", "parameter index out of range");
        return {{}, mk_base(prog.params[t->index].second, ann0())};
      }
      case TermKind::Var: {
        auto it = ctx.find(t->name);
        if (it == ctx.end())
          err("ill-typed", "unbound variable '" + t->name + "'");
        return {{}, it->second};
      }
      case TermKind::Add:
      case TermKind::Mul:
        return infer_binop(ctx, t);
      case TermKind::Neg:
      case TermKind::Inv:
      case TermKind::Exp:
      case TermKind::Log:
        return infer_unop(ctx, t);
      case TermKind::SigmaEta: {
        if (sys != System::Basic)
          err("ill-typed", "internal sigma node has no annotated typing rule");
        Scope s(*this, "sigma");
        auto r = infer(ctx, t->ch[0]);
        if (r.type->is_fun) err("ill-typed", "sigma of a function value");
        return {r.trace, mk_base(BaseType::R, ann0())};
      }
      case TermKind::Sample: {
        if ((sys == System::Poly || sys == System::Sgd) &&
            !has_finite_moments(t->dist))
          err("distribution lacks finite moments", dist_name(t->dist));
        TraceSlot slot = fresh_slot(t->dist, t.get());
        Ann a = ann0();
        if (sys == System::Unif) {
          a.g = true;
          a.deps = {slot.id};
        }
        return {{slot}, mk_base(BaseType::R, a)};
      }
      case TermKind::Transform:
        return infer_transform(ctx, t);
      case TermKind::If:
        return infer_if(ctx, t);
      case TermKind::Lam: {
        TypePtr binder_ty;
        if (t->hint) {
          binder_ty = hint_type(*t->hint);
        } else {
          binder_ty = mk_base(BaseType::R, ann0());
          defaulted_binders.insert(t->name);
        }
        if (binder_ty->is_fun) first_order = false;
        Scope s(*this, "lam");
        Ctx c2 = ctx;
        c2[t->name] = binder_ty;
        auto body = infer(c2, t->ch[0]);
        return {{}, mk_fun(binder_ty, body.trace, body.type)};
      }
      case TermKind::App:
        return infer_app(ctx, t);
      case TermKind::Times:
      case TermKind::Pow:
        return infer_arith_sugar(ctx, t);
    }
    err("ill-typed", "unhandled node");
  }

  InferResult infer_binop(const Ctx& ctx, const TermPtr& t) {
    bool is_add = t->kind == TermKind::Add;
    const char* opn = is_add ? "add" : "mul";
    InferResult r1, r2;
    {
      Scope s(*this, std::string(opn) + ".lhs");
      r1 = infer(ctx, t->ch[0]);
    }
    {
      Scope s(*this, std::string(opn) + ".rhs");
      r2 = infer(ctx, t->ch[1]);
    }
    Scope s(*this, opn);
    if (r1.type->is_fun || r2.type->is_fun)
      err("ill-typed", "arithmetic on a function value");
    BaseType b = base_join(r1.type->base, r2.type->base);
    Ann a;
    switch (sys) {
      case System::Basic:
      case System::Poly:
        break;
      case System::Sgd: {
        int e1 = r1.type->ann.e, e2 = r2.type->ann.e;
        if (is_add) {
          if (e1 != 0 || e2 != 0)
            err("annotation mismatch", "addition requires annotation 0 operands");
          a.e = 0;
        } else {
          if (e1 != e2) {
            // raise the lower side via subsumption; only legal at preal
            const TypePtr& low = e1 < e2 ? r1.type : r2.type;
            if (low->base != BaseType::Rpos)
              err("annotation mismatch",
                  "multiplication operands have unequal annotations");
          }
          a.e = std::max(e1, e2);
        }
        break;
      }
      case System::Unif: {
        const Ann& a1 = r1.type->ann;
        const Ann& a2 = r2.type->ann;
        std::set<int> inter;
        std::set_intersection(a1.deps.begin(), a1.deps.end(), a2.deps.begin(),
                              a2.deps.end(),
                              std::inserter(inter, inter.begin()));
        std::set_union(a1.deps.begin(), a1.deps.end(), a2.deps.begin(),
                       a2.deps.end(), std::inserter(a.deps, a.deps.begin()));
        if (a1.g && a2.g && inter.empty()) {
          a.g = true;
        } else {
          a.g = false;
          a.overlap = a1.g && a2.g && !inter.empty();
        }
        break;
      }
    }
    return {concat(std::move(r1.trace), r2.trace), mk_base(b, a)};
  }

  InferResult infer_unop(const Ctx& ctx, const TermPtr& t) {
    const char* opn = t->kind == TermKind::Neg   ? "neg"
                      : t->kind == TermKind::Inv ? "inv"
                      : t->kind == TermKind::Exp ? "exp"
                                                 : "log";
    InferResult r;
    {
      Scope s(*this, opn);
      r = infer(ctx, t->ch[0]);
      if (r.type->is_fun) err("ill-typed", "arithmetic on a function value");
      if (sys == System::Poly && t->kind != TermKind::Neg)
        err("primitive not in poly fragment", opn);
      if ((t->kind == TermKind::Inv || t->kind == TermKind::Log) &&
          r.type->base != BaseType::Rpos)
        err("ill-typed",
            std::string(opn) + " requires a positive-typed argument");
      BaseType b;
      Ann a = r.type->ann;
      a.overlap = false;
      switch (t->kind) {
        case TermKind::Neg:
          b = BaseType::R;
          if (sys == System::Sgd && r.type->ann.e != 0)
            err("annotation mismatch", "negation requires annotation 0");
          if (sys == System::Unif) a.overlap = r.type->ann.overlap;
          break;
        case TermKind::Inv:
          b = BaseType::Rpos;
          break;
        case TermKind::Exp:
          b = BaseType::Rpos;
          if (sys == System::Sgd) {
            if (r.type->ann.e != 0)
              err("annotation mismatch", "exp requires annotation 0");
            a.e = 1;
          }
          break;
        case TermKind::Log:
        default:
          b = BaseType::R;
          if (sys == System::Sgd) a.e = 0;
          break;
      }
      return {std::move(r.trace), mk_base(b, a)};
    }
  }

  InferResult infer_transform(const Ctx& ctx, const TermPtr& t) {
    Scope s(*this, "transform");
    if (sys == System::Unif) {
      if (!is_diffeomorphic_transform(t->ch[0], prog))
        err("transform not diffeomorphic", "transform map not in the affine whitelist");
      TraceSlot slot = fresh_slot(t->dist, t.get());
      Ann a;
      a.g = true;
      a.deps = {slot.id};
      return {{slot}, mk_base(BaseType::R, a)};
    }
    // Elsewhere a transform types exactly as (app map (sample D)).
    auto sample = mk_sample(t->dist);
    auto app = mk_app(t->ch[0], sample);
    auto r = infer(ctx, app);
    for (auto& slot : r.trace)
      if (slot.origin == sample.get()) slot.origin = t.get();
    return r;
  }

  InferResult infer_if(const Ctx& ctx, const TermPtr& t) {
    InferResult rg, rt, re;
    {
      Scope s(*this, "if.guard");
      rg = infer(ctx, t->ch[0]);
      if (rg.type->is_fun) err("ill-typed", "guard must have base type");
      if (sys == System::Sgd && rg.type->ann.e != 0)
        err("annotation mismatch", "guard requires annotation 0");
      if (sys == System::Unif && !rg.type->ann.g) {
        if (rg.type->ann.overlap)
          err("overlapping dependencies in guard arithmetic",
              "guard combines values depending on shared samples");
        err("guard not guard-safe", "guard is not typed guard-safe");
      }
    }
    {
      Scope s(*this, "if.then");
      rt = infer(ctx, t->ch[1]);
    }
    {
      Scope s(*this, "if.else");
      re = infer(ctx, t->ch[2]);
    }
    Scope s(*this, "if");
    if (rt.type->is_fun || re.type->is_fun) first_order = false;
    if (!is_safe_type(rt.type) || !is_safe_type(re.type))
      err("branch not safe type", "conditional branches must have safe types");
    if (!safe_ann_ok(rt.type) || !safe_ann_ok(re.type))
      err("annotation mismatch", "branch annotation must be 0 at safe types");
    TypePtr joined = join_branches(rt.type, re.type);
    auto tr = concat(std::move(rg.trace), rt.trace);
    return {concat(std::move(tr), re.trace), joined};
  }

  InferResult infer_app(const Ctx& ctx, const TermPtr& t) {
    const TermPtr& fn = t->ch[0];
    const TermPtr& arg = t->ch[1];
    if (fn->kind == TermKind::Lam) {
      // Bidirectional elaboration: the argument's type types the binder.
      InferResult ra;
      {
        Scope s(*this, "app.arg");
        ra = infer(ctx, arg);
      }
      if (ra.type->is_fun) first_order = false;
      TypePtr binder_ty = ra.type;
      if (fn->hint) {
        binder_ty = hint_type(*fn->hint);
        Scope s(*this, "app");
        if (!subtype_annotated(sys, ra.type, binder_ty))
          err("ill-typed", "argument does not match the binder's hinted type");
      }
      InferResult rb;
      {
        Scope s(*this, "app.fn.lam");
        Ctx c2 = ctx;
        c2[fn->name] = binder_ty;
        rb = infer(c2, fn->ch[0]);
      }
      return {concat(std::move(ra.trace), rb.trace), rb.type};
    }
    InferResult rf;
    {
      Scope s(*this, "app.fn");
      rf = infer(ctx, fn);
    }
    Scope s(*this, "app");
    if (!rf.type->is_fun) {
      if (fn->kind == TermKind::Var && defaulted_binders.count(fn->name))
        err("unannotated higher-order binder",
            "binder '" + fn->name +
                "' is used as a function but has no type hint and is not in "
                "an elaborable position");
      err("ill-typed", "applying a non-function value");
    }
    InferResult ra;
    {
      Scope s2(*this, "app.arg");
      ra = infer(ctx, arg);
    }
    if (ra.type->is_fun) first_order = false;
    if (!subtype_annotated(sys, ra.type, rf.type->arg))
      err("ill-typed", "argument type does not match function's domain");
    // Instantiate the function's latent trace with fresh slot ids.
    std::map<int, int> m;
    TraceType inst = rf.type->trace;
    for (auto& slot : inst) {
      int nid = next_id++;
      m[slot.id] = nid;
      slot.id = nid;
    }
    TypePtr res = remap_type(rf.type->res, m);
    auto tr = concat(std::move(rf.trace), ra.trace);
    return {concat(std::move(tr), inst), res};
  }

  InferResult infer_arith_sugar(const Ctx& ctx, const TermPtr& t) {
    const char* opn = t->kind == TermKind::Times ? "times" : "pow";
    Scope s(*this, opn);
    auto r = infer(ctx, t->ch[0]);
    if (r.type->is_fun) err("ill-typed", "arithmetic on a function value");
    if (r.trace.empty()) {
      if (sys == System::Sgd && t->kind == TermKind::Times &&
          r.type->ann.e != 0)
        err("annotation mismatch", "times requires annotation 0 operands");
      return r;  // repetition of a sample-free value preserves the type
    }
    // The operand draws samples: each repetition draws independently, so
    // type the desugared chain (fresh slots per copy).
    TermKind op = t->kind == TermKind::Times ? TermKind::Add : TermKind::Mul;
    TermPtr acc = t->ch[0];
    for (long i = 1; i < t->arity; ++i) acc = mk2(op, t->ch[0], acc);
    return infer(ctx, acc);
  }
};

InferResult finalize(InferResult r) {
  // Positional slot names: s1, s2, ... left to right in the final trace.
  std::map<int, int> m;
  int pos = 1;
  for (auto& slot : r.trace) {
    m[slot.id] = pos;
    slot.id = pos;
    ++pos;
  }
  // Rename dependency references in the reported type.
  struct {
    const std::map<int, int>& m;
    TypePtr operator()(const TypePtr& t) {
      if (t->is_fun) return mk_fun((*this)(t->arg), t->trace, (*this)(t->res));
      if (t->ann.deps.empty()) return t;
      Ann a = t->ann;
      std::set<int> nd;
      for (int id : a.deps) {
        auto it = m.find(id);
        nd.insert(it == m.end() ? id : it->second);
      }
      a.deps = std::move(nd);
      return mk_base(t->base, a);
    }
  } remap{m};
  r.type = remap(r.type);
  return r;
}

}  // namespace

InferResult infer_basic(const Program& p) {
  Checker c(System::Basic, p);
  return finalize(c.infer({}, p.body));
}

bool program_is_first_order(const Program& p) {
  Checker c(System::Basic, p);
  try {
    c.infer({}, p.body);
  } catch (const LangError&) {
    return false;
  }
  return c.first_order;
}

InferResult check_annotated(System sys, const Program& p) {
  Checker c(sys, p);
  return finalize(c.infer({}, p.body));
}

InferResult infer_term(System sys, const Program& p,
                       const std::map<std::string, TypePtr>& ctx,
                       const TermPtr& t) {
  Checker c(sys, p);
  return finalize(c.infer(ctx, t));
}

std::optional<AffineParts> affine_parts(const TermPtr& map) {
  if (map->kind != TermKind::Lam) return std::nullopt;
  const std::string& s = map->name;
  const TermPtr& body = map->ch[0];

  auto clean = [&](const TermPtr& t) {
    return !occurs(t, s) && !contains_sampling(t) && !contains_if(t);
  };
  auto is_s = [&](const TermPtr& t) {
    return t->kind == TermKind::Var && t->name == s;
  };
  auto match_scaled = [&](const TermPtr& t, TermPtr& scale) {
    if (t->kind != TermKind::Mul) return false;
    if (is_s(t->ch[1]) && clean(t->ch[0])) {
      scale = t->ch[0];
      return true;
    }
    if (is_s(t->ch[0]) && clean(t->ch[1])) {
      scale = t->ch[1];
      return true;
    }
    return false;
  };

  AffineParts parts;
  if (is_s(body)) return parts;  // identity
  if (match_scaled(body, parts.scale)) return parts;
  if (body->kind == TermKind::Add) {
    for (int i = 0; i < 2; ++i) {
      const TermPtr& lin = body->ch[i];
      const TermPtr& off = body->ch[1 - i];
      if (!clean(off)) continue;
      if (is_s(lin)) {
        parts.offset = off;
        return parts;
      }
      if (match_scaled(lin, parts.scale)) {
        parts.offset = off;
        return parts;
      }
      parts.scale = nullptr;
    }
  }
  return std::nullopt;
}

bool is_diffeomorphic_transform(const TermPtr& map, const Program& p) {
  auto parts = affine_parts(map);
  if (!parts) return false;
  for (const TermPtr& coeff : {parts->scale, parts->offset}) {
    if (!coeff) continue;
    if (!free_vars(coeff).empty()) return false;  // only parameters allowed
    try {
      Checker c(System::Basic, p);
      auto r = c.infer({}, coeff);
      if (!r.trace.empty() || r.type->is_fun) return false;
      if (coeff == parts->scale && r.type->base != BaseType::Rpos)
        return false;
    } catch (const LangError&) {
      return false;
    }
  }
  return true;
}

}  // namespace sppl
