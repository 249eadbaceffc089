#include "sppl/compile.hpp"

#include "sppl/error.hpp"
#include "sppl/typecheck.hpp"

namespace sppl {

namespace {

struct Rewriter {
  int counter = 0;

  TermPtr rewrite(const TermPtr& t) {
    std::vector<TermPtr> ch;
    bool changed = false;
    ch.reserve(t->ch.size());
    for (const auto& c : t->ch) {
      auto nc = rewrite(c);
      changed |= nc != c;
      ch.push_back(std::move(nc));
    }
    if (t->kind != TermKind::If) {
      if (!changed) return t;
      auto n = std::make_shared<Term>(*t);
      n->ch = std::move(ch);
      return n;
    }
    std::string w = "%w" + std::to_string(counter++);
    auto wv = mk_var(w);
    auto body = mk2(
        TermKind::Add,
        mk2(TermKind::Mul, mk1(TermKind::SigmaEta, mk1(TermKind::Neg, wv)),
            ch[1]),
        mk2(TermKind::Mul, mk1(TermKind::SigmaEta, mk_var(w)), ch[2]));
    return mk_app(mk_lam(w, body), ch[0]);
  }
};

}  // namespace

bool is_first_order(const Program& p) { return program_is_first_order(p); }

Program smooth_compile(const Program& p) {
  if (!is_first_order(p))
    throw LangError("not first-order",
                    "the smoothing compiler handles first-order programs only");
  Rewriter rw;
  return Program{p.params, rw.rewrite(p.body)};
}

}  // namespace sppl
