#include <cmath>

#include "corpus.hpp"
#include "doctest.h"
#include "sppl/autodiff.hpp"
#include "sppl/builtins.hpp"
#include "sppl/error.hpp"
#include "sppl/parser.hpp"
#include "sppl/rng.hpp"
#include "sppl/typecheck.hpp"

using namespace sppl;

namespace {

std::vector<double> theta_for(const Program& p, double real_v, double preal_v) {
  std::vector<double> th;
  for (const auto& [n, b] : p.params)
    th.push_back(b == BaseType::Rpos ? preal_v : real_v);
  return th;
}

// relative deviation with an absolute floor: near-zero gradients are judged
// against the finite-difference noise scale instead of themselves
double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-3);
}

}  // namespace

TEST_CASE("primitive derivative rules") {
  auto x = Dual::seeded(2.0, 1, 0);
  auto c = Dual(3.0, 1);
  CHECK(dual_apply("add", {x, c}).d[0] == 1.0);
  CHECK(dual_apply("mul", {x, x}).d[0] == 4.0);
  CHECK(dual_apply("neg", {x}).d[0] == -1.0);
  CHECK(dual_apply("inv", {x}).d[0] == -0.25);
  CHECK(dual_apply("exp", {x}).d[0] == doctest::Approx(std::exp(2.0)));
  CHECK(dual_apply("log", {x}).d[0] == 0.5);
  SmoothingConfig cfg{0.1};
  double s = sigmoid(20.0);
  CHECK(dual_apply("sigma", {x}, cfg).d[0] ==
        doctest::Approx(s * (1 - s) / 0.1));
  CHECK_THROWS_AS(dual_apply("inv", {Dual(-1.0, 1)}), LangError);
  CHECK_THROWS_AS(dual_apply("sigma", {x}), LangError);
}

TEST_CASE("smoothed gradient of the discontinuous example") {
  // d/dtheta sigma_eta(s + theta) = sigma(g/eta)(1 - sigma(g/eta))/eta
  Program p = builtin("nconv").model.program;
  auto r = grad_smoothed(p, {0.3}, {0.1}, SmoothingConfig{0.1});
  double s = sigmoid(4.0);
  CHECK(r.value == doctest::Approx(s).epsilon(1e-12));
  CHECK(r.grad[0] == doctest::Approx(s * (1 - s) / 0.1).epsilon(1e-10));
  CHECK(r.grad[0] == doctest::Approx(0.17668).epsilon(1e-3));
}

TEST_CASE("measurable gradient differentiates through the chosen branch only") {
  Program p = builtin("example1").model.program;
  // guard's contribution is dropped: gradient is -theta on either side
  auto a = grad_measurable(p, {0.7}, {1.0});
  CHECK(a.grad[0] == doctest::Approx(-0.7).epsilon(1e-12));
  auto b = grad_measurable(p, {0.7}, {-3.0});
  CHECK(b.grad[0] == doctest::Approx(-0.7).epsilon(1e-12));
}

TEST_CASE("smoothed gradient matches central finite differences on the corpus") {
  for (const auto& e : corpus()) {
    CAPTURE(e.name);
    Program p = parse_program(e.src);
    auto sigma = infer_basic(p).trace;
    for (double eta : {0.2, 0.1}) {
      SmoothingConfig cfg{eta};
      Rng rng(11);
      for (int i = 0; i < 20; ++i) {
        auto th = theta_for(p, 0.4 + 0.01 * i, 0.8 + 0.01 * i);
        std::vector<double> tr;
        for (const auto& slot : sigma) tr.push_back(rng.draw(slot.dist));
        auto g = grad_smoothed(p, th, tr, cfg);
        auto fd = finite_diff_grad(p, th, tr, cfg, 1e-6);
        for (size_t j = 0; j < th.size(); ++j) {
          CAPTURE(eta);
          CAPTURE(i);
          CAPTURE(j);
          CHECK(rel_err(g.grad[j], fd[j]) < 1e-5);
        }
      }
    }
  }
}

TEST_CASE("measurable gradient matches finite differences away from jumps") {
  // on a trace where no guard is near 0 the measurable value is locally
  // smooth in theta
  Program p = builtin("example1").model.program;
  auto g = grad_measurable(p, {0.5}, {2.0});
  auto fd = finite_diff_grad(p, {0.5}, {2.0}, std::nullopt, 1e-6);
  CHECK(rel_err(g.grad[0], fd[0]) < 1e-8);
}

TEST_CASE("finite differences respect the preal boundary") {
  Program p = parse_program("(program (params (sig preal)) (body (log sig)))");
  std::vector<double> none;
  CHECK_THROWS_WITH_AS(finite_diff_grad(p, {1e-8}, none, std::nullopt, 1e-6),
                       doctest::Contains("domain violation near boundary"),
                       LangError);
}

TEST_CASE("gradients have one partial per parameter") {
  Program p = builtin("textmsg-mini").model.program;
  auto sigma = infer_basic(p).trace;
  REQUIRE(sigma.size() == 3);
  auto r = grad_smoothed(p, builtin("textmsg-mini").theta0, {0.1, -0.2, 0.3},
                         SmoothingConfig{0.15});
  CHECK(r.grad.size() == 6);
  for (double g : r.grad) CHECK(std::isfinite(g));
}
