#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "dope/lang/ast.h"

namespace dope::lang {

Program parse_program(std::string_view src);
Program load_program(const std::string & path);

// Resolves a name to a slot; returns -1 for unknown names.
using NameResolver = std::function<int(const std::string &)>;

// Parses a standalone expression or formula. Unknown names raise a
// SemanticError; with `temporal` the operators G, X, F (prefix) and W, U
// (infix) are accepted.
ExprP parse_expr(std::string_view src, const NameResolver & names,
                 bool temporal = false);

// "(0, 2] step 0.1" or "{0, 1}", as in declarations
Domain parse_domain(std::string_view src);

std::string pretty_print(const Program & p);
std::string to_string(const Stmt & s, int indent = 0);

}  // namespace dope::lang
