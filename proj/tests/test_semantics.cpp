#include <cmath>

#include "corpus.hpp"
#include "doctest.h"
#include "sppl/ast_ops.hpp"
#include "sppl/builtins.hpp"
#include "sppl/error.hpp"
#include "sppl/eval.hpp"
#include "sppl/parser.hpp"
#include "sppl/rng.hpp"
#include "sppl/typecheck.hpp"

using namespace sppl;

namespace {

std::vector<double> theta_for(const Program& p, double real_v = 0.4,
                              double preal_v = 0.8) {
  std::vector<double> th;
  for (const auto& [n, b] : p.params)
    th.push_back(b == BaseType::Rpos ? preal_v : real_v);
  return th;
}

}  // namespace

TEST_CASE("strict conditional picks the branch by the guard sign") {
  Program p = builtin("nconv").model.program;
  // guard s + theta = -1 < 0 takes the then-branch, which is 0
  CHECK(eval_measurable(p, {1.0}, {-2.0}).r == 0.0);
  CHECK(eval_measurable(p, {1.0}, {-1.0}).r == 1.0);  // boundary: >= 0
  CHECK(eval_measurable(p, {1.0}, {0.5}).r == 1.0);
}

TEST_CASE("smoothed conditional is the sigmoid combination") {
  Program p = builtin("nconv").model.program;
  SmoothingConfig cfg{0.1};
  for (double s : {-1.5, -0.2, 0.0, 0.3, 2.0}) {
    for (double th : {-1.0, 0.0, 0.7}) {
      double expect = sigma_eta(s + th, cfg);
      CHECK(eval_smoothed(p, {th}, {s}, cfg).r ==
            doctest::Approx(expect).epsilon(1e-15));
    }
  }
}

TEST_CASE("constant-guard example has the paper's exact values") {
  Program p = builtin("ex0g").model.program;
  CHECK(eval_measurable(p, {0.5}, {}).r == 0.25);
  CHECK(eval_smoothed(p, {0.5}, {}, SmoothingConfig{0.1}).r == 0.75);
  // the smoothed value is 3/4 regardless of eta
  CHECK(eval_smoothed(p, {0.5}, {}, SmoothingConfig{0.01}).r == 0.75);
}

TEST_CASE("weights multiply the densities of all draws") {
  Program p = parse_program(
      "(program (params (theta real))"
      " (body (add (sample normal) (sample exponential))))");
  std::vector<double> tr = {0.3, 1.7};
  std::vector<double> th = {0.0};
  Evaluator<double> ev(p, EvalMode::Strict, std::nullopt, th, tr);
  Value<double> v = ev.run();
  CHECK(v.r == 2.0);
  CHECK(ev.log_weight ==
        doctest::Approx(log_pdf(Dist::Normal, 0.3) +
                        log_pdf(Dist::Exponential, 1.7))
            .epsilon(1e-15));
}

TEST_CASE("both branch sub-traces are consumed") {
  Program p = parse_program(
      "(program (params (theta real))"
      " (body (if theta (sample normal) (sample exponential))))");
  // needs exactly two samples even though one branch is discarded
  CHECK(eval_measurable(p, {-1.0}, {0.5, 2.0}).r == 0.5);
  CHECK(eval_measurable(p, {1.0}, {0.5, 2.0}).r == 2.0);
  CHECK_THROWS_WITH_AS(eval_measurable(p, {1.0}, {0.5}),
                       doctest::Contains("trace length mismatch"), LangError);
  CHECK_THROWS_WITH_AS(eval_measurable(p, {1.0}, {0.5, 2.0, 3.0}),
                       doctest::Contains("trace length mismatch"), LangError);
}

TEST_CASE("weighted combination at safe types") {
  auto r1 = Value<double>::real(2.0);
  auto r2 = Value<double>::real(10.0);
  CHECK(combine_safe(0.25, r1, 0.75, r2).r == 8.0);
  CHECK_THROWS_WITH_AS(combine_safe(0.5, r1, 0.2, r2),
                       doctest::Contains("type mismatch in combination"),
                       LangError);

  // combining a real with a closure is a type mismatch
  Program p = parse_program("(program (params) (body (lam x x)))");
  std::vector<double> none;
  Value<double> clo = eval_measurable(p, {}, none);
  CHECK_THROWS_WITH_AS(combine_safe(0.5, r1, 0.5, clo),
                       doctest::Contains("type mismatch in combination"),
                       LangError);
}

TEST_CASE("smoothed function branches combine pointwise") {
  // (if s (lam x (add x 1)) (lam x x)) applied to 2:
  // sigma(-s/eta)*3 + sigma(s/eta)*2
  Program p = parse_program(
      "(program (params (theta real))"
      " (body (app (if (sample normal) (lam x (add x 1)) (lam x x)) 2)))");
  SmoothingConfig cfg{0.2};
  for (double s : {-0.8, -0.1, 0.0, 0.4}) {
    double w2 = sigma_eta(s, cfg);
    double expect = (1 - w2) * 3.0 + w2 * 2.0;
    CHECK(eval_smoothed(p, {0.0}, {s}, cfg).r ==
          doctest::Approx(expect).epsilon(1e-15));
  }
}

TEST_CASE("times and pow match their desugared forms bit for bit") {
  Program p = parse_program(
      "(program (params (theta real))"
      " (body (mul (times 3 (sample normal)) (pow (sample exponential) 2))))");
  Program d = desugar_arith(p);
  auto sigma = infer_basic(p).trace;
  CHECK(sigma.size() == 5);
  CHECK(same_dists(sigma, infer_basic(d).trace));
  Rng rng(42);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> tr;
    for (const auto& slot : sigma) tr.push_back(rng.draw(slot.dist));
    Evaluator<double> e1(p, EvalMode::Strict, std::nullopt, {0.0}, tr);
    Evaluator<double> e2(d, EvalMode::Strict, std::nullopt, {0.0}, tr);
    CHECK(e1.run().r == e2.run().r);
    CHECK(e1.log_weight == e2.log_weight);
  }
}

TEST_CASE("sigma nodes need a smoothing configuration") {
  Program p = parse_program("(program (params (theta real)) (body (sigma theta)))",
                            true);
  std::vector<double> none;
  CHECK_THROWS_AS(eval_measurable(p, {1.0}, none), LangError);
  CHECK(eval_measurable(p, {0.0}, none, SmoothingConfig{0.1}).r == 0.5);
}

TEST_CASE("operational and denotational evaluation agree on the corpus") {
  const int kTraces = 1000;
  for (const auto& e : corpus()) {
    CAPTURE(e.name);
    Program p = parse_program(e.src);
    auto sigma = infer_basic(p).trace;
    auto th = theta_for(p);
    Rng rng(7 + sigma.size());
    for (int i = 0; i < kTraces; ++i) {
      std::vector<double> tr;
      for (const auto& slot : sigma) tr.push_back(rng.draw(slot.dist));
      Evaluator<double> den(p, EvalMode::Strict, std::nullopt, th, tr);
      Value<double> dv = den.run();
      OpResult op = eval_operational(p, th, tr);
      if (dv.tag == Value<double>::Real) {
        REQUIRE(op.value->kind == TermKind::Const);
        CHECK(op.value->value == dv.r);
      } else {
        CHECK(op.value->kind == TermKind::Lam);
      }
      CHECK(std::abs(op.log_weight - den.log_weight) <= 1e-12);
    }
  }
}

TEST_CASE("operational weights multiply pdfs") {
  Program p = builtin("nconv").model.program;
  OpResult r = eval_operational(p, {1.0}, {-2.0});
  CHECK(r.value->value == 0.0);
  CHECK(r.weight == doctest::Approx(pdf(Dist::Normal, -2.0)).epsilon(1e-15));
}

TEST_CASE("domain violations are runtime errors") {
  Program p = parse_program(
      "(program (params (theta real)) (body (log theta)))",
      false);
  // log of a nonpositive value; reachable because runtime values are checked
  std::vector<double> none;
  CHECK_THROWS_WITH_AS(
      (Evaluator<double>(p, EvalMode::Strict, std::nullopt,
                         std::vector<double>{-1.0}, none)
           .run()),
      doctest::Contains("domain violation"), LangError);
}
