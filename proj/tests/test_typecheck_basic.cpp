#include <map>

#include "corpus.hpp"
#include "doctest.h"
#include "sppl/ast_ops.hpp"
#include "sppl/error.hpp"
#include "sppl/parser.hpp"
#include "sppl/typecheck.hpp"

using namespace sppl;

namespace {

// if x then sample_N else (sample_E + sample_E)
TermPtr m_prime() {
  return mk_if(mk_var("x"), mk_sample(Dist::Normal),
               mk2(TermKind::Add, mk_sample(Dist::Exponential),
                   mk_sample(Dist::Exponential)));
}

size_t sampling_nodes(const TermPtr& t) {
  size_t n = (t->kind == TermKind::Sample || t->kind == TermKind::Transform)
                 ? 1
                 : 0;
  long reps = (t->kind == TermKind::Times || t->kind == TermKind::Pow)
                  ? t->arity
                  : 1;
  size_t c = 0;
  for (const auto& ch : t->ch) c += sampling_nodes(ch);
  if (t->kind == TermKind::Times || t->kind == TermKind::Pow)
    return n + reps * c;
  // transform maps are applied once; the map's own sampling is counted by
  // recursion, plus the node's own draw
  return n + c;
}

}  // namespace

TEST_CASE("subtyping lattice") {
  auto r = mk_base(BaseType::R);
  auto rp = mk_base(BaseType::Rpos);
  CHECK(subtype(rp, r));
  CHECK(!subtype(r, rp));
  CHECK(subtype(r, r));
  // contravariant arg, covariant result
  CHECK(subtype(mk_fun(r, {}, rp), mk_fun(rp, {}, r)));
  // trace types must match
  CHECK(!subtype(mk_fun(r, {{1, Dist::Normal}}, r), mk_fun(r, {}, r)));
}

TEST_CASE("safe types") {
  auto r = mk_base(BaseType::R);
  auto rp = mk_base(BaseType::Rpos);
  CHECK(is_safe_type(r));
  CHECK(is_safe_type(mk_fun(r, {}, rp)));
  CHECK(!is_safe_type(mk_fun(r, {{1, Dist::Normal}}, r)));
}

TEST_CASE("conditional concatenates guard, then and else traces") {
  Program empty{{}, mk_const(0)};
  std::map<std::string, TypePtr> ctx{{"x", mk_base(BaseType::R)}};
  auto r = infer_term(System::Basic, empty, ctx, m_prime());
  REQUIRE(r.trace.size() == 3);
  CHECK(r.trace[0].dist == Dist::Normal);
  CHECK(r.trace[1].dist == Dist::Exponential);
  CHECK(r.trace[2].dist == Dist::Exponential);
  CHECK(!r.type->is_fun);
  CHECK(r.type->base == BaseType::R);
}

TEST_CASE("lambda over the conditional") {
  Program empty{{}, mk_const(0)};
  auto r = infer_term(System::Basic, empty, {}, mk_lam("x", m_prime()));
  REQUIRE(r.type->is_fun);
  CHECK(r.trace.empty());
  CHECK(r.type->arg->base == BaseType::R);
  REQUIRE(r.type->trace.size() == 3);
  CHECK(r.type->trace[0].dist == Dist::Normal);
  CHECK(r.type->res->base == BaseType::R);
}

TEST_CASE("self application of a sampling function") {
  // (lam f (f (f 0))) (lam x sample_N) uses the function's trace twice
  Program p = parse_program(
      "(program (params)"
      " (body (app (lam f (app f (app f 0))) (lam x (sample normal)))))");
  auto r = infer_basic(p);
  REQUIRE(r.trace.size() == 2);
  CHECK(r.trace[0].dist == Dist::Normal);
  CHECK(r.trace[1].dist == Dist::Normal);
  CHECK(r.type->base == BaseType::R);
}

TEST_CASE("application order is function, argument, body") {
  Program p = parse_program(
      "(program (params)"
      " (body (app (lam f (app f (app f (sample normal))))"
      "            (lam x (if x (sample normal)"
      "                         (add (sample exponential)"
      "                              (sample exponential)))))))");
  auto r = infer_basic(p);
  std::vector<Dist> expect = {Dist::Normal,      Dist::Normal,
                              Dist::Exponential, Dist::Exponential,
                              Dist::Normal,      Dist::Exponential,
                              Dist::Exponential};
  REQUIRE(r.trace.size() == expect.size());
  for (size_t i = 0; i < expect.size(); ++i) CHECK(r.trace[i].dist == expect[i]);
}

TEST_CASE("function branches must be safe") {
  Program p = parse_program(
      "(program (params)"
      " (body (if (sample normal) (lam x (sample normal)) (lam x x))))");
  CHECK_THROWS_WITH_AS(infer_basic(p),
                       doctest::Contains("branch not safe type"), LangError);
}

TEST_CASE("safe function branches are allowed") {
  Program p = parse_program(
      "(program (params)"
      " (body (app (if (sample normal) (lam x (add x 1)) (lam x x)) 2)))");
  auto r = infer_basic(p);
  CHECK(r.trace.size() == 1);
  CHECK(r.type->base == BaseType::R);
}

TEST_CASE("positive constants and primitives get the precise base type") {
  auto infer1 = [](const std::string& body) {
    return infer_basic(parse_program(
        "(program (params (sig preal) (theta real)) (body " + body + "))"));
  };
  CHECK(infer1("2").type->base == BaseType::Rpos);
  CHECK(infer1("-2").type->base == BaseType::R);
  CHECK(infer1("0").type->base == BaseType::R);
  CHECK(infer1("(inv sig)").type->base == BaseType::Rpos);
  CHECK(infer1("(exp theta)").type->base == BaseType::Rpos);
  CHECK(infer1("(mul sig sig)").type->base == BaseType::Rpos);
  CHECK(infer1("(add sig theta)").type->base == BaseType::R);
  // inv and log require positive arguments
  CHECK_THROWS_AS(infer1("(inv theta)"), LangError);
  CHECK_THROWS_AS(infer1("(log theta)"), LangError);
}

TEST_CASE("higher-order binders need an elaborable position or a hint") {
  Program p = parse_program(
      "(program (params) (body (lam f (app f 1))))");
  CHECK_THROWS_WITH_AS(infer_basic(p),
                       doctest::Contains("unannotated higher-order binder"),
                       LangError);
}

TEST_CASE("trace length equals sampling nodes in evaluation order") {
  for (const auto& e : corpus()) {
    CAPTURE(e.name);
    Program p = parse_program(e.src);
    auto r = infer_basic(p);
    CHECK(r.trace.size() == static_cast<size_t>(e.dims));
    // higher-order programs may consume a function's trace repeatedly, so
    // the syntactic count only matches for first-order ones
    if (e.first_order)
      CHECK(r.trace.size() == sampling_nodes(desugar_arith(p.body)));
  }
}

TEST_CASE("inference is deterministic") {
  for (const auto& e : corpus()) {
    CAPTURE(e.name);
    Program p = parse_program(e.src);
    auto a = infer_basic(p);
    auto b = infer_basic(p);
    CHECK(same_dists(a.trace, b.trace));
    CHECK(type_to_string(a.type, System::Basic) ==
          type_to_string(b.type, System::Basic));
  }
}

TEST_CASE("slot names are positional") {
  Program p = parse_program(
      "(program (params (theta real))"
      " (body (add (sample normal) (sample exponential))))");
  auto r = infer_basic(p);
  REQUIRE(r.trace.size() == 2);
  CHECK(r.trace[0].id == 1);
  CHECK(r.trace[1].id == 2);
}
