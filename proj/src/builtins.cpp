#include "sppl/builtins.hpp"

#include <sstream>

#include "sppl/error.hpp"
#include "sppl/parser.hpp"

namespace sppl {

namespace {

// Inline application of the normal-pdf helper
//   N = lam x. lam m. lam (s preal). (sqrt(2pi)*s)^-1 * exp(-0.5*((x+(-m))*s^-1)^2)
// There is no let form, so each use site re-expands the lambda chain.
std::string npdf(const std::string& x, const std::string& m,
                 const std::string& s) {
  const char* nlam =
      "(lam x (lam m (lam (s preal)"
      " (mul (inv (mul 2.5066282746310002 s))"
      " (exp (mul -0.5 (pow (mul (add x (neg m)) (inv s)) 2)))))))";
  return "(app (app (app " + std::string(nlam) + " " + x + ") " + m + ") " +
         s + ")";
}

std::string log_npdf(const std::string& x, const std::string& m,
                     const std::string& s) {
  return "(log " + npdf(x, m, s) + ")";
}

std::string add_chain(const std::vector<std::string>& terms) {
  std::string out = terms.back();
  for (size_t i = terms.size() - 1; i-- > 0;)
    out = "(add " + terms[i] + " " + out + ")";
  return out;
}

// Counterexample to unbiasedness of the reparameterisation gradient:
//   f(theta, s) = -0.5*theta^2 + (0 if s+theta<0 else 1),  s ~ N(0,1).
// Written exactly as the two-part application so the AST matches the
// reference shape used in tests. Note this is the raw integrand, not its
// negation; the bench negates it before minimising.
BuiltinModel make_example1() {
  BuiltinModel b;
  b.name = "example1";
  b.model = make_model(parse_program(
      "(program (params (theta real))\n"
      " (body (app (lam z (add (mul -0.5 (mul theta theta)) (if z 0 1)))\n"
      "            (transform normal (lam s (add s theta))))))\n"));
  b.theta0 = {0.0};
  b.run.iters = 5000;
  b.run.eta = SmoothingConfig{0.15};
  b.negate_for_bench = true;
  return b;
}

// Negated instantaneous ELBO for the LYY18 Proposition 2 model:
//   p(z) = N(z|0,1) * (N(0|-2,1) if z<0 else N(0|5,1)),  q_theta = N(theta,1),
//   z reparameterised as z = s + theta with s ~ N(0,1).
// The program computes log q - log p so that minimising its expectation
// maximises the ELBO.
BuiltinModel make_prop2() {
  std::string z = "z";
  std::string logp =
      "(add " + log_npdf(z, "0", "1") + " (if z " + log_npdf("0", "-2", "1") +
      " " + log_npdf("0", "5", "1") + "))";
  std::string logq = log_npdf(z, "theta", "1");
  std::string body = "(app (lam z (add " + logq + " (neg " + logp + ")))" +
                     " (transform normal (lam s (add s theta))))";
  BuiltinModel b;
  b.name = "prop2";
  b.model = make_model(
      parse_program("(program (params (theta real)) (body " + body + "))"));
  b.theta0 = {0.0};
  b.run.iters = 5000;
  b.run.eta = SmoothingConfig{0.15};
  return b;
}

// Constant-zero guard: the smoothed objective has its only stationary point
// at theta=1/2 for every eta, but the true objective's minimum is at theta=1.
BuiltinModel make_ex0g() {
  BuiltinModel b;
  b.name = "ex0g";
  b.model = make_model(parse_program(
      "(program (params (theta real))\n"
      " (body (if 0 (add (mul theta theta) 1)\n"
      "             (mul (add theta (neg 1)) (add theta (neg 1))))))"));
  b.theta0 = {0.0};
  b.run.iters = 2000;
  b.run.eta = SmoothingConfig{0.1};
  return b;
}

// Discontinuous but uniformly-convergent model: [s + theta >= 0].
BuiltinModel make_nconv() {
  BuiltinModel b;
  b.name = "nconv";
  b.model = make_model(parse_program(
      "(program (params (theta real))\n"
      " (body (if (transform normal (lam s (add s theta))) 0 1)))"));
  b.theta0 = {0.0};
  b.run.iters = 2000;
  b.run.eta = SmoothingConfig{0.1};
  return b;
}

// Change-point model over 5 days of message counts. Rate regimes r1 = e^{z1}
// before the switch day tau and r2 = e^{z2} after; Poisson log-likelihood up
// to a constant is c*z - e^z. Mean-field normal variational family with
// (mean, stddev) parameters per latent; the body is the negated ELBO
// integrand log q - log p.
BuiltinModel make_textmsg() {
  const int counts[5] = {13, 24, 8, 24, 7};
  auto tr = [](const std::string& mu, const std::string& sig) {
    return "(transform normal (lam s (add (mul s " + sig + ") " + mu + ")))";
  };
  std::vector<std::string> like;
  for (int d = 0; d < 5; ++d) {
    std::string c = std::to_string(counts[d]);
    std::string early = "(add (mul " + c + " z1) (neg (exp z1)))";
    std::string late = "(add (mul " + c + " z2) (neg (exp z2)))";
    // day d is in the early regime when d - tau < 0
    like.push_back("(if (add " + std::to_string(d) + " (neg tau)) " + early +
                   " " + late + ")");
  }
  std::string logprior = add_chain({log_npdf("z1", "0", "3"),
                                    log_npdf("z2", "0", "3"),
                                    log_npdf("tau", "2", "2")});
  std::string logq = add_chain({log_npdf("z1", "mu1", "sig1"),
                                log_npdf("z2", "mu2", "sig2"),
                                log_npdf("tau", "mu3", "sig3")});
  std::string logp = "(add " + logprior + " " + add_chain(like) + ")";
  std::string body = "(app (app (app (lam z1 (lam z2 (lam tau (add " + logq +
                     " (neg " + logp + "))))) " + tr("mu1", "sig1") + ") " +
                     tr("mu2", "sig2") + ") " + tr("mu3", "sig3") + ")";
  BuiltinModel b;
  b.name = "textmsg-mini";
  b.model = make_model(parse_program(
      "(program (params (mu1 real) (sig1 preal) (mu2 real) (sig2 preal)"
      " (mu3 real) (sig3 preal)) (body " + body + "))"));
  b.theta0 = {2.0, 0.5, 2.0, 0.5, 2.0, 1.0};
  b.run.iters = 5000;
  b.run.eta = SmoothingConfig{0.15};
  return b;
}

// 2-2-1 network with Heaviside activations fit to XOR, mean-field normal
// variational family over the 9 weights. Squared-error likelihood plus
// standard-normal prior; body is log q - log p (negated ELBO integrand).
BuiltinModel make_xornet() {
  const int xs[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  const int ts[4] = {0, 1, 1, 0};
  std::ostringstream params;
  std::vector<std::string> transforms, logq, logprior, binders;
  for (int i = 0; i < 9; ++i) {
    std::string mw = "mw" + std::to_string(i);
    std::string sw = "sw" + std::to_string(i);
    std::string w = "w" + std::to_string(i);
    params << " (" << mw << " real) (" << sw << " preal)";
    transforms.push_back("(transform normal (lam s (add (mul s " + sw + ") " +
                         mw + ")))");
    binders.push_back(w);
    logq.push_back(log_npdf(w, mw, sw));
    logprior.push_back(log_npdf(w, "0", "1"));
  }
  // step(v) = 0 if v < 0, else 1
  auto step = [](const std::string& v) { return "(if " + v + " 0 1)"; };
  auto lin = [&](int w0, const std::string& a, const std::string& b) {
    auto wn = [&](int k) { return "w" + std::to_string(w0 + k); };
    return "(add (mul " + wn(0) + " " + a + ") (add (mul " + wn(1) + " " + b +
           ") " + wn(2) + "))";
  };
  std::vector<std::string> like;
  for (int p = 0; p < 4; ++p) {
    std::string x1 = std::to_string(xs[p][0]);
    std::string x2 = std::to_string(xs[p][1]);
    std::string h1 = step(lin(0, x1, x2));
    std::string h2 = step(lin(3, x1, x2));
    std::string out = step(lin(6, h1, h2));
    like.push_back("(neg (pow (add " + out + " (neg " +
                   std::to_string(ts[p]) + ")) 2))");
  }
  std::string logp =
      "(add " + add_chain(logprior) + " " + add_chain(like) + ")";
  std::string body =
      "(add " + add_chain(logq) + " (neg " + logp + "))";
  for (size_t i = binders.size(); i-- > 0;)
    body = "(lam " + binders[i] + " " + body + ")";
  for (const auto& t : transforms) body = "(app " + body + " " + t + ")";

  BuiltinModel b;
  b.name = "xornet-mini";
  b.model = make_model(parse_program(
      "(program (params" + params.str() + ") (body " + body + "))"));
  b.theta0.assign(18, 0.0);
  for (int i = 0; i < 9; ++i) {
    b.theta0[2 * i] = (i % 2 ? 0.5 : -0.5);  // break the symmetry
    b.theta0[2 * i + 1] = 1.0;
  }
  b.run.iters = 2000;
  b.run.eta = SmoothingConfig{0.15};
  return b;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"example1", "prop2", "ex0g", "nconv", "textmsg-mini", "xornet-mini"};
}

BuiltinModel builtin(const std::string& name) {
  if (name == "example1") return make_example1();
  if (name == "prop2") return make_prop2();
  if (name == "ex0g") return make_ex0g();
  if (name == "nconv") return make_nconv();
  if (name == "textmsg-mini") return make_textmsg();
  if (name == "xornet-mini") return make_xornet();
  throw LangError("unknown model", name);
}

Program negated(const Program& p) {
  return Program{p.params, mk1(TermKind::Neg, p.body)};
}

}  // namespace sppl
