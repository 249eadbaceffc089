#include "sppl/term.hpp"

namespace sppl {

namespace {
std::shared_ptr<Term> node(TermKind k) {
  auto t = std::make_shared<Term>();
  t->kind = k;
  return t;
}
}  // namespace

TermPtr mk_var(std::string n) {
  auto t = node(TermKind::Var);
  t->name = std::move(n);
  return t;
}

TermPtr mk_param(int index, std::string n) {
  auto t = node(TermKind::Param);
  t->index = index;
  t->name = std::move(n);
  return t;
}

TermPtr mk_const(double v) {
  auto t = node(TermKind::Const);
  t->value = v;
  return t;
}

TermPtr mk1(TermKind k, TermPtr a) {
  auto t = node(k);
  t->ch = {std::move(a)};
  return t;
}

TermPtr mk2(TermKind k, TermPtr a, TermPtr b) {
  auto t = node(k);
  t->ch = {std::move(a), std::move(b)};
  return t;
}

TermPtr mk_if(TermPtr g, TermPtr th, TermPtr el) {
  auto t = node(TermKind::If);
  t->ch = {std::move(g), std::move(th), std::move(el)};
  return t;
}

TermPtr mk_sample(Dist d) {
  auto t = node(TermKind::Sample);
  t->dist = d;
  return t;
}

TermPtr mk_transform(Dist d, TermPtr map) {
  auto t = node(TermKind::Transform);
  t->dist = d;
  t->ch = {std::move(map)};
  return t;
}

TermPtr mk_lam(std::string binder, TermPtr body, std::optional<TypeHint> hint) {
  auto t = node(TermKind::Lam);
  t->name = std::move(binder);
  t->hint = std::move(hint);
  t->ch = {std::move(body)};
  return t;
}

TermPtr mk_app(TermPtr f, TermPtr a) {
  auto t = node(TermKind::App);
  t->ch = {std::move(f), std::move(a)};
  return t;
}

TermPtr mk_times(long k, TermPtr m) {
  auto t = node(TermKind::Times);
  t->arity = k;
  t->ch = {std::move(m)};
  return t;
}

TermPtr mk_pow(TermPtr m, long k) {
  auto t = node(TermKind::Pow);
  t->arity = k;
  t->ch = {std::move(m)};
  return t;
}

}  // namespace sppl
