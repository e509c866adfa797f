#pragma once

// Reference interpreter for the loop-free (and bounded-loop) R subset used by the
// property tests. It shares only the parser with the library under test.

#include "rflow/ast.hpp"

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rflow::oracle {

struct Closure;

struct Value {
  std::variant<std::monostate, double, bool, std::string, std::shared_ptr<Closure>> data;

  bool is_null() const { return std::holds_alternative<std::monostate>(data); }
  bool operator==(const Value &other) const;
  std::string show() const;
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunResult {
  std::vector<Value> printed;
  // Last value bound at each VariableDefinition site (target Symbol or Parameter id).
  std::map<NodeId, Value> definitions;
  // Last value of each evaluated expression node.
  std::map<NodeId, Value> values;
  bool completed = false;
};

/// Runs the program; throws EvalError on undefined variables, type errors, or when the
/// step budget is exhausted.
RunResult run(const NormalizedAst &ast, int step_budget = 100000);

} // namespace rflow::oracle
