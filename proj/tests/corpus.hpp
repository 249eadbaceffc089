#pragma once

#include <string>
#include <vector>

// Shared program corpus for the test suites. Each entry records which of the
// annotated systems accepts it, the trace dimension, whether the smoothing
// compiler applies (first-order), and whether the quadrature oracle gives a
// truncation-stable value (cauchy's principal-value integrals are excluded).
struct CorpusEntry {
  const char* name;
  std::string src;
  int dims;
  bool first_order;
  bool poly, sgd, unif;
  bool stable_oracle;
};

inline const std::vector<CorpusEntry>& corpus() {
  static const std::vector<CorpusEntry> entries = {
      {"const7", "(program (params (theta real)) (body 7))", 0, true, true,
       true, true, true},

      {"linear", "(program (params (theta real)) (body (add (mul 2 theta) 1)))",
       0, true, true, true, true, true},

      {"square", "(program (params (theta real)) (body (mul theta theta)))", 0,
       true, true, true, true, true},

      {"sample1", "(program (params (theta real)) (body (sample normal)))", 1,
       true, true, true, true, true},

      {"two_dists",
       "(program (params (theta real))"
       " (body (add (sample normal) (mul theta (sample exponential)))))",
       2, true, true, true, true, true},

      {"example1",
       "(program (params (theta real))"
       " (body (app (lam z (add (mul -0.5 (mul theta theta)) (if z 0 1)))"
       "            (transform normal (lam s (add s theta))))))",
       1, true, true, true, true, true},

      {"nconv",
       "(program (params (theta real))"
       " (body (if (transform normal (lam s (add s theta))) 0 1)))",
       1, true, true, true, true, true},

      {"ex0g",
       "(program (params (theta real))"
       " (body (if 0 (add (mul theta theta) 1)"
       "            (mul (add theta (neg 1)) (add theta (neg 1))))))",
       0, true, true, true, false, true},

      {"exp_sample",
       "(program (params (theta real)) (body (exp (sample normal))))", 1, true,
       false, true, true, true},

      {"log_exp", "(program (params (theta real)) (body (log (exp theta))))",
       0, true, false, true, true, true},

      {"inv_preal", "(program (params (sig preal)) (body (inv sig)))", 0, true,
       false, true, true, true},

      {"pow2", "(program (params (theta real)) (body (pow (sample normal) 2)))",
       2, true, true, true, true, true},

      {"times3",
       "(program (params (theta real))"
       " (body (add (times 3 (sample exponential)) theta)))",
       3, true, true, true, true, true},

      {"cauchy1", "(program (params (theta real)) (body (sample cauchy)))", 1,
       true, false, false, true, false},

      {"ho_apply",
       "(program (params (theta real))"
       " (body (app (lam f (app f (app f (sample normal))))"
       "            (lam x (if x (sample normal)"
       "                         (add (sample exponential)"
       "                              (sample exponential)))))))",
       7, false, true, true, false, true},

      {"branch_funs",
       "(program (params (theta real))"
       " (body (app (if (sample normal) (lam x (add x 1)) (lam x x)) 2)))",
       1, false, true, true, true, true},

      {"deep_ifs",
       "(program (params (theta real))"
       " (body (if (sample normal) (if theta 1 2) (if theta 3 4))))",
       1, true, true, true, false, true},

      {"transform_scale",
       "(program (params (mu real) (sig preal))"
       " (body (transform logistic (lam s (add (mul s sig) mu)))))",
       1, true, true, true, true, true},

      {"transform_nonaffine",
       "(program (params (theta real))"
       " (body (transform normal (lam s (exp s)))))",
       1, true, false, true, false, true},

      {"guard_overlap",
       "(program (params (theta real))"
       " (body (if (app (lam x (add x (neg x)))"
       "                (transform normal (lam y y))) 0 1)))",
       1, true, true, true, false, true},

      {"logexp2",
       "(program (params (theta real))"
       " (body (add (log (exp (sample logistic))) theta)))",
       1, true, false, true, true, true},
  };
  return entries;
}
