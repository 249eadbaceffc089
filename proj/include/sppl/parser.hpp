#pragma once

#include <string>

#include "sppl/term.hpp"

namespace sppl {

// Parses the s-expression surface syntax. Binders are alpha-renamed to be
// globally unique. With allow_internal=true the reserved forms produced by
// the smoothing compiler ((sigma t) nodes and %-prefixed binders) are
// accepted; user source rejects them.
Program parse_program(const std::string& text, bool allow_internal = false);

std::string print_term(const TermPtr& t);
std::string print_program(const Program& p);

}  // namespace sppl
