#pragma once

#include "sppl/term.hpp"

namespace sppl {

// True iff the term's binders and application arguments all have base type.
bool is_first_order(const Program& p);

// Rewrites every conditional
//   (if L M N)  ~>  (app (lam %w (add (mul (sigma (neg %w)) M)
//                                     (mul (sigma %w) N))) L)
// bottom-up. The output contains SigmaEta nodes (eta supplied at evaluation
// time) and fresh %-prefixed binders the parser only accepts in internal
// mode. Throws "not first-order" when the precondition fails.
Program smooth_compile(const Program& p);

}  // namespace sppl
