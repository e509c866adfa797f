#pragma once

#include "rflow/ast.hpp"

#include <set>
#include <string>

namespace rflow {

using NodeSet = std::set<NodeId>;

/// Source lines that must be printed for `keep` to be emitted as parseable code.
std::set<int> reprint_lines(const NormalizedAst &ast, const NodeSet &keep);

/// Emits every line holding a kept node, plus the headers and braces of the control
/// structures and function definitions that enclose kept nodes. Trailing whitespace is
/// stripped; each emitted line ends in '\n'.
std::string reprint(const NormalizedAst &ast, const NodeSet &keep);

} // namespace rflow
