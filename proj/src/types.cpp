#include "sppl/types.hpp"

#include <algorithm>
#include <sstream>

namespace sppl {

bool same_dists(const TraceType& a, const TraceType& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].dist != b[i].dist) return false;
  return true;
}

TraceType concat(TraceType a, const TraceType& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::string trace_to_string(const TraceType& t) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < t.size(); ++i) {
    if (i) os << ", ";
    os << dist_name(t[i].dist);
  }
  os << "]";
  return os.str();
}

TypePtr mk_base(BaseType b, Ann a) {
  auto t = std::make_shared<Type>();
  t->base = b;
  t->ann = std::move(a);
  return t;
}

TypePtr mk_fun(TypePtr arg, TraceType trace, TypePtr res) {
  auto t = std::make_shared<Type>();
  t->is_fun = true;
  t->arg = std::move(arg);
  t->trace = std::move(trace);
  t->res = std::move(res);
  return t;
}

bool is_safe_type(const TypePtr& t) {
  if (!t->is_fun) return true;
  return t->trace.empty() && is_safe_type(t->arg) && is_safe_type(t->res);
}

static bool base_sub(BaseType b1, BaseType b2) {
  return b1 == b2 || (b1 == BaseType::Rpos && b2 == BaseType::R);
}

bool subtype(const TypePtr& t1, const TypePtr& t2) {
  if (t1->is_fun != t2->is_fun) return false;
  if (!t1->is_fun) return base_sub(t1->base, t2->base);
  return same_dists(t1->trace, t2->trace) && subtype(t2->arg, t1->arg) &&
         subtype(t1->res, t2->res);
}

bool subtype_annotated(System sys, const TypePtr& t1, const TypePtr& t2) {
  if (t1->is_fun != t2->is_fun) return false;
  if (t1->is_fun)
    return same_dists(t1->trace, t2->trace) &&
           subtype_annotated(sys, t2->arg, t1->arg) &&
           subtype_annotated(sys, t1->res, t2->res);
  if (!base_sub(t1->base, t2->base)) return false;
  switch (sys) {
    case System::Basic:
    case System::Poly:
      return true;
    case System::Sgd:
      // e1 = e2, or both sides Rpos and e1 <= e2.
      if (t1->ann.e == t2->ann.e) return true;
      return t1->base == BaseType::Rpos && t2->base == BaseType::Rpos &&
             t1->ann.e <= t2->ann.e;
    case System::Unif: {
      // true is below false; dependency sets may only grow.
      bool gok = t1->ann.g == t2->ann.g || (t1->ann.g && !t2->ann.g);
      return gok && std::includes(t2->ann.deps.begin(), t2->ann.deps.end(),
                                  t1->ann.deps.begin(), t1->ann.deps.end());
    }
  }
  return false;
}

static void print_type(std::ostringstream& os, const TypePtr& t, System sys) {
  if (t->is_fun) {
    os << "(";
    print_type(os, t->arg, sys);
    os << " -[";
    for (size_t i = 0; i < t->trace.size(); ++i) {
      if (i) os << ",";
      os << dist_name(t->trace[i].dist);
    }
    os << "]-> ";
    print_type(os, t->res, sys);
    os << ")";
    return;
  }
  os << (t->base == BaseType::R ? "real" : "preal");
  if (sys == System::Sgd) {
    os << "@{e=" << t->ann.e << "}";
  } else if (sys == System::Unif) {
    os << "@{g=" << (t->ann.g ? "true" : "false") << ",deps={";
    bool first = true;
    for (int id : t->ann.deps) {
      if (!first) os << ",";
      first = false;
      os << "s" << id;
    }
    os << "}}";
  }
}

std::string type_to_string(const TypePtr& t, System sys) {
  std::ostringstream os;
  print_type(os, t, sys);
  return os.str();
}

}  // namespace sppl
