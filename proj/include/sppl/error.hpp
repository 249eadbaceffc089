#pragma once

#include <stdexcept>
#include <string>

namespace sppl {

// Every user-facing failure carries a short machine-checkable kind
// (e.g. "ill-typed", "guard not guard-safe") plus a node path into the
// program such as "body.app.fn.if.then".
struct LangError : std::runtime_error {
  std::string kind;
  std::string path;

  LangError(std::string k, std::string message, std::string p = {})
      : std::runtime_error(p.empty() ? k + ": " + message
                                     : k + ": " + message + " (at " + p + ")"),
        kind(std::move(k)),
        path(std::move(p)) {}
};

}  // namespace sppl
