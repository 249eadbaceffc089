#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "sppl/term.hpp"

namespace sppl {

enum class System { Basic, Poly, Sgd, Unif };

// One slot of a trace type: which distribution is drawn at this position.
// `id` is a checker-internal identifier (renumbered positionally at the end
// of inference so slot names s1,s2,... read left to right); `origin` points
// at the Sample/Transform node the slot was created for, when known.
struct TraceSlot {
  int id = 0;
  Dist dist = Dist::Normal;
  const Term* origin = nullptr;
};
using TraceType = std::vector<TraceSlot>;

bool same_dists(const TraceType& a, const TraceType& b);
TraceType concat(TraceType a, const TraceType& b);
std::string trace_to_string(const TraceType& t);

// Annotation payload; which fields are meaningful depends on the system:
//   Basic/Poly: none.  Sgd: e in {0,1}.  Unif: (g, deps).
struct Ann {
  int e = 0;
  bool g = false;
  std::set<int> deps;
  // Diagnostic only (never part of subtyping): set when a unif annotation
  // was downgraded to g=false because guard arithmetic had overlapping
  // dependency sets; lets the conditional rule report the precise error.
  bool overlap = false;
};

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
  bool is_fun = false;
  // base case
  BaseType base = BaseType::R;
  Ann ann;
  // function case
  TypePtr arg;
  TraceType trace;
  TypePtr res;
};

TypePtr mk_base(BaseType b, Ann a = {});
TypePtr mk_fun(TypePtr arg, TraceType trace, TypePtr res);

bool is_safe_type(const TypePtr& t);
bool subtype(const TypePtr& t1, const TypePtr& t2);  // core (annotations ignored)
bool subtype_annotated(System sys, const TypePtr& t1, const TypePtr& t2);

std::string type_to_string(const TypePtr& t, System sys);

}  // namespace sppl
