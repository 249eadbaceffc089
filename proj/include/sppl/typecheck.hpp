#pragma once

#include <map>
#include <optional>
#include <string>

#include "sppl/term.hpp"
#include "sppl/types.hpp"

namespace sppl {

struct InferResult {
  TraceType trace;
  TypePtr type;
};

// Trace-type inference for the basic system. Throws LangError on rejection.
InferResult infer_basic(const Program& p);

// The three annotated systems. sys must not be Basic here.
InferResult check_annotated(System sys, const Program& p);

// True iff every Lam binder and every App argument has base type under
// basic inference (false also when the program does not typecheck).
bool program_is_first_order(const Program& p);

// Inference for a term with free variables (testing/tooling entry point).
InferResult infer_term(System sys, const Program& p,
                       const std::map<std::string, TypePtr>& ctx,
                       const TermPtr& t);

// Syntactic whitelist for the transform side condition: lambda s. s,
// (A*s)+B, (s*A)+B, A*s, s*A, s+B, B+s with A,B sample- and conditional-free,
// s not occurring in A or B, and A of core type Rpos under the parameters.
bool is_diffeomorphic_transform(const TermPtr& map, const Program& p);

// Scale/offset of an affine transform map (null pointer means the constant
// 1 / 0 respectively); nullopt when the map is not in the affine whitelist.
struct AffineParts {
  TermPtr scale;   // A, or null for 1
  TermPtr offset;  // B, or null for 0
};
std::optional<AffineParts> affine_parts(const TermPtr& map);

}  // namespace sppl
