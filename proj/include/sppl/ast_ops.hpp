#pragma once

#include <set>
#include <string>

#include "sppl/term.hpp"

namespace sppl {

// Capture-avoiding substitution M[V/x]. V must draw no samples
// (no Sample/Transform nodes); errors with "substituting sampling term".
TermPtr substitute(const TermPtr& m, const std::string& x, const TermPtr& v);

// Same, without the sample-freeness restriction (used by the operational
// evaluator, where substituted values are abstractions that may sample when
// later applied).
TermPtr subst_unchecked(const TermPtr& m, const std::string& x,
                        const TermPtr& v);

// Expands Times(a,M) into an a-fold Add chain and Pow(M,a) into an a-fold
// Mul chain (right-nested); Transform maps are left intact.
TermPtr desugar_arith(const TermPtr& m);
Program desugar_arith(const Program& p);

bool alpha_equal(const TermPtr& a, const TermPtr& b);
bool alpha_equal(const Program& a, const Program& b);

size_t count_nodes(const TermPtr& t);
size_t count_ifs(const TermPtr& t);
bool contains_sampling(const TermPtr& t);  // any Sample/Transform node
std::set<std::string> free_vars(const TermPtr& t);

}  // namespace sppl
