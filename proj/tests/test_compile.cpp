#include <cmath>

#include "corpus.hpp"
#include "doctest.h"
#include "sppl/ast_ops.hpp"
#include "sppl/builtins.hpp"
#include "sppl/compile.hpp"
#include "sppl/error.hpp"
#include "sppl/eval.hpp"
#include "sppl/parser.hpp"
#include "sppl/rng.hpp"
#include "sppl/typecheck.hpp"

using namespace sppl;

namespace {

std::vector<double> theta_for(const Program& p) {
  std::vector<double> th;
  for (const auto& [n, b] : p.params)
    th.push_back(b == BaseType::Rpos ? 0.8 : 0.4);
  return th;
}

}  // namespace

TEST_CASE("compiled conditionals evaluate to the smoothed semantics") {
  for (const auto& e : corpus()) {
    if (!e.first_order) continue;
    CAPTURE(e.name);
    Program p = parse_program(e.src);
    Program q = smooth_compile(p);
    auto sigma = infer_basic(p).trace;
    auto th = theta_for(p);
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
      std::vector<double> tr;
      for (const auto& slot : sigma) tr.push_back(rng.draw(slot.dist));
      for (double eta : {0.2, 0.1, 0.05}) {
        SmoothingConfig cfg{eta};
        double direct = eval_smoothed(p, th, tr, cfg).r;
        double compiled = eval_measurable(q, th, tr, cfg).r;
        CHECK(std::abs(direct - compiled) <= 1e-12);
      }
    }
  }
}

TEST_CASE("each conditional costs exactly nine nodes") {
  for (const auto& e : corpus()) {
    if (!e.first_order) continue;
    CAPTURE(e.name);
    Program p = parse_program(e.src);
    Program q = smooth_compile(p);
    CHECK(count_nodes(q.body) ==
          count_nodes(p.body) + 9 * count_ifs(p.body));
    CHECK(count_ifs(q.body) == 0);
  }
}

TEST_CASE("growth is linear, not exponential, in nesting depth") {
  // build a tower of nested conditionals and check linear growth
  std::string body = "theta";
  for (int i = 0; i < 12; ++i) body = "(if theta " + body + " 1)";
  Program p = parse_program("(program (params (theta real)) (body " + body + "))");
  Program q = smooth_compile(p);
  CHECK(count_nodes(q.body) == count_nodes(p.body) + 9 * 12);
}

TEST_CASE("higher-order programs are rejected") {
  Program p = parse_program(corpus()[14].src);  // ho_apply
  REQUIRE(std::string(corpus()[14].name) == "ho_apply");
  CHECK_THROWS_WITH_AS(smooth_compile(p), doctest::Contains("not first-order"),
                       LangError);
  Program b = parse_program(
      "(program (params (theta real))"
      " (body (app (if (sample normal) (lam x (add x 1)) (lam x x)) 2)))");
  CHECK_THROWS_AS(smooth_compile(b), LangError);
}

TEST_CASE("compiler output round-trips through the internal parser only") {
  Program p = builtin("example1").model.program;
  Program q = smooth_compile(p);
  std::string text = print_program(q);
  CHECK_THROWS_WITH_AS(parse_program(text),
                       doctest::Contains("reserved internal form"), LangError);
  Program r = parse_program(text, true);
  CHECK(alpha_equal(q, r));
}

TEST_CASE("compilation commutes with evaluation on the counterexample") {
  // analytic check: compiled example1 at theta, s is
  // -0.5 theta^2 + sigma_eta(s + theta)
  Program q = smooth_compile(builtin("example1").model.program);
  SmoothingConfig cfg{0.15};
  for (double s : {-1.0, 0.0, 0.6}) {
    double expect = -0.5 * 0.3 * 0.3 + sigma_eta(s + 0.3, cfg);
    CHECK(eval_measurable(q, {0.3}, {s}, cfg).r ==
          doctest::Approx(expect).epsilon(1e-15));
  }
}

TEST_CASE("sampling guards stay outside the sigma weights") {
  // the guard is evaluated once: trace is consumed identically
  Program p = builtin("nconv").model.program;
  Program q = smooth_compile(p);
  CHECK(same_dists(infer_basic(p).trace, infer_basic(q).trace));
}
