#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sppl/distribution.hpp"

namespace sppl {

enum class BaseType { R, Rpos };  // real / preal

// Optional binder type hint, e.g. (lam (s preal) ...) or
// (lam (x real@{e=1}) ...) / (lam (x real@{g=true,deps={s1}}) ...).
struct TypeHint {
  BaseType base = BaseType::R;
  std::optional<int> e;                  // sgd annotation
  std::optional<bool> g;                 // unif guard flag
  std::optional<std::vector<int>> deps;  // unif dependency slots (positional)
};

enum class TermKind {
  Var, Param, Const,
  Add, Mul, Neg, Inv, Exp, Log,
  If, Sample, Transform,
  Lam, App,
  Times, Pow,
  SigmaEta,  // internal, produced by the smoothing compiler
};

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  TermKind kind;
  std::string name;              // Var / Lam binder / Param display name
  int index = -1;                // Param: position in the parameter vector
  double value = 0.0;            // Const
  long arity = 0;                // Times / Pow repetition count (>= 1)
  Dist dist = Dist::Normal;      // Sample / Transform
  std::optional<TypeHint> hint;  // Lam binder hint
  std::vector<TermPtr> ch;       // children in evaluation order
};

struct Program {
  std::vector<std::pair<std::string, BaseType>> params;
  TermPtr body;
};

// Constructors.
TermPtr mk_var(std::string n);
TermPtr mk_param(int index, std::string n);
TermPtr mk_const(double v);
TermPtr mk1(TermKind k, TermPtr a);
TermPtr mk2(TermKind k, TermPtr a, TermPtr b);
TermPtr mk_if(TermPtr g, TermPtr t, TermPtr e);
TermPtr mk_sample(Dist d);
TermPtr mk_transform(Dist d, TermPtr map);
TermPtr mk_lam(std::string binder, TermPtr body,
               std::optional<TypeHint> hint = std::nullopt);
TermPtr mk_app(TermPtr f, TermPtr a);
TermPtr mk_times(long k, TermPtr m);
TermPtr mk_pow(TermPtr m, long k);

}  // namespace sppl
