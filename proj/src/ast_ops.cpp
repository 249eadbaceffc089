#include "sppl/ast_ops.hpp"

#include <atomic>
#include <map>

#include "sppl/error.hpp"

namespace sppl {

namespace {

std::atomic<unsigned long> rename_counter{0};

TermPtr clone_with_children(const Term& t, std::vector<TermPtr> ch) {
  auto n = std::make_shared<Term>(t);
  n->ch = std::move(ch);
  return n;
}

TermPtr subst_rec(const TermPtr& m, const std::string& x, const TermPtr& v,
                  const std::set<std::string>& v_free) {
  switch (m->kind) {
    case TermKind::Var:
      return m->name == x ? v : m;
    case TermKind::Param:
    case TermKind::Const:
    case TermKind::Sample:
      return m;
    case TermKind::Lam: {
      if (m->name == x) return m;  // x shadowed
      if (v_free.count(m->name)) {
        // rename the binder to avoid capturing a free variable of V
        std::string fresh =
            m->name + "_r" + std::to_string(++rename_counter);
        auto renamed_body =
            subst_rec(m->ch[0], m->name, mk_var(fresh), {});
        auto lam = mk_lam(fresh, renamed_body, m->hint);
        return subst_rec(lam, x, v, v_free);
      }
      auto body = subst_rec(m->ch[0], x, v, v_free);
      return body == m->ch[0] ? m : mk_lam(m->name, body, m->hint);
    }
    default: {
      std::vector<TermPtr> ch;
      bool changed = false;
      ch.reserve(m->ch.size());
      for (const auto& c : m->ch) {
        auto nc = subst_rec(c, x, v, v_free);
        changed |= nc != c;
        ch.push_back(std::move(nc));
      }
      return changed ? clone_with_children(*m, std::move(ch)) : m;
    }
  }
}

}  // namespace

TermPtr subst_unchecked(const TermPtr& m, const std::string& x,
                        const TermPtr& v) {
  return subst_rec(m, x, v, free_vars(v));
}

TermPtr substitute(const TermPtr& m, const std::string& x, const TermPtr& v) {
  if (contains_sampling(v))
    throw LangError("substituting sampling term",
                    "substituted value must not contain sample/transform");
  return subst_unchecked(m, x, v);
}

TermPtr desugar_arith(const TermPtr& m) {
  switch (m->kind) {
    case TermKind::Times:
    case TermKind::Pow: {
      auto inner = desugar_arith(m->ch[0]);
      TermKind op = m->kind == TermKind::Times ? TermKind::Add : TermKind::Mul;
      // Right-nested: times 3 M = (add M (add M M)).
      TermPtr acc = inner;
      for (long i = 1; i < m->arity; ++i) acc = mk2(op, inner, acc);
      return acc;
    }
    case TermKind::Transform: {
      // keep the node; desugar inside the map
      auto map = desugar_arith(m->ch[0]);
      return map == m->ch[0] ? m : mk_transform(m->dist, map);
    }
    default: {
      if (m->ch.empty()) return m;
      std::vector<TermPtr> ch;
      bool changed = false;
      for (const auto& c : m->ch) {
        auto nc = desugar_arith(c);
        changed |= nc != c;
        ch.push_back(std::move(nc));
      }
      return changed ? clone_with_children(*m, std::move(ch)) : m;
    }
  }
}

Program desugar_arith(const Program& p) {
  return Program{p.params, desugar_arith(p.body)};
}

static bool alpha_rec(const TermPtr& a, const TermPtr& b,
                      std::map<std::string, std::string>& ab) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case TermKind::Var: {
      auto it = ab.find(a->name);
      if (it != ab.end()) return it->second == b->name;
      return a->name == b->name;
    }
    case TermKind::Param:
      return a->index == b->index;
    case TermKind::Const:
      return a->value == b->value;
    case TermKind::Sample:
      return a->dist == b->dist;
    case TermKind::Transform:
      if (a->dist != b->dist) return false;
      break;
    case TermKind::Times:
    case TermKind::Pow:
      if (a->arity != b->arity) return false;
      break;
    case TermKind::Lam: {
      auto saved = ab.find(a->name) != ab.end()
                       ? std::optional<std::string>(ab[a->name])
                       : std::nullopt;
      ab[a->name] = b->name;
      bool ok = alpha_rec(a->ch[0], b->ch[0], ab);
      if (saved) ab[a->name] = *saved;
      else ab.erase(a->name);
      return ok;
    }
    default:
      break;
  }
  if (a->ch.size() != b->ch.size()) return false;
  for (size_t i = 0; i < a->ch.size(); ++i)
    if (!alpha_rec(a->ch[i], b->ch[i], ab)) return false;
  return true;
}

bool alpha_equal(const TermPtr& a, const TermPtr& b) {
  std::map<std::string, std::string> ab;
  return alpha_rec(a, b, ab);
}

bool alpha_equal(const Program& a, const Program& b) {
  if (a.params.size() != b.params.size()) return false;
  for (size_t i = 0; i < a.params.size(); ++i)
    if (a.params[i].second != b.params[i].second) return false;
  return alpha_equal(a.body, b.body);
}

size_t count_nodes(const TermPtr& t) {
  size_t n = 1;
  for (const auto& c : t->ch) n += count_nodes(c);
  return n;
}

size_t count_ifs(const TermPtr& t) {
  size_t n = t->kind == TermKind::If ? 1 : 0;
  for (const auto& c : t->ch) n += count_ifs(c);
  return n;
}

bool contains_sampling(const TermPtr& t) {
  if (t->kind == TermKind::Sample || t->kind == TermKind::Transform)
    return true;
  for (const auto& c : t->ch)
    if (contains_sampling(c)) return true;
  return false;
}

static void fv_rec(const TermPtr& t, std::set<std::string>& bound,
                   std::set<std::string>& out) {
  switch (t->kind) {
    case TermKind::Var:
      if (!bound.count(t->name)) out.insert(t->name);
      return;
    case TermKind::Lam: {
      bool inserted = bound.insert(t->name).second;
      fv_rec(t->ch[0], bound, out);
      if (inserted) bound.erase(t->name);
      return;
    }
    default:
      for (const auto& c : t->ch) fv_rec(c, bound, out);
  }
}

std::set<std::string> free_vars(const TermPtr& t) {
  std::set<std::string> bound, out;
  fv_rec(t, bound, out);
  return out;
}

}  // namespace sppl
