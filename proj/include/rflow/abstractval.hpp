#pragma once

#include "rflow/controlflow.hpp"
#include "rflow/dataflow.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace rflow {

struct Bottom {
  bool operator==(const Bottom &) const = default;
};
struct Top {
  bool operator==(const Top &) const = default;
};
/// Closed interval over the extended reals. `integral` means every member is whole.
struct Interval {
  double lo = 0;
  double hi = 0;
  bool integral = false;
  bool operator==(const Interval &) const = default;
};
struct StringSet {
  std::set<std::string> values; // empty only when `any`
  bool any = false;
  bool operator==(const StringSet &) const = default;
};
struct LogicalSet {
  bool can_true = false;
  bool can_false = false;
  bool operator==(const LogicalSet &) const = default;
};

class AbstractValue {
public:
  using Data = std::variant<Bottom, Interval, StringSet, LogicalSet, Top>;

  AbstractValue() = default;
  AbstractValue(Data d);

  static AbstractValue bottom() { return AbstractValue(Bottom{}); }
  static AbstractValue top() { return AbstractValue(Top{}); }
  static AbstractValue number(double v, bool integral);
  static AbstractValue interval(double lo, double hi, bool integral);
  static AbstractValue string(std::string s);
  static AbstractValue logical(bool v);
  static AbstractValue any_logical() { return AbstractValue(LogicalSet{true, true}); }

  const Data &data() const { return data_; }
  bool is_bottom() const { return std::holds_alternative<Bottom>(data_); }
  bool is_top() const { return std::holds_alternative<Top>(data_); }
  const Interval *as_interval() const { return std::get_if<Interval>(&data_); }
  const StringSet *as_strings() const { return std::get_if<StringSet>(&data_); }
  const LogicalSet *as_logicals() const { return std::get_if<LogicalSet>(&data_); }

  /// Single string value, if exactly one is possible.
  std::optional<std::string> single_string() const;
  /// Definite truth value of a condition.
  Truth truth() const;

  bool operator==(const AbstractValue &) const = default;

  /// `[42L, 42L]`, `"a", "b"`, `TRUE`, `⊤`, `⊥`.
  std::string render() const;

private:
  Data data_ = Bottom{};
};

AbstractValue join(const AbstractValue &a, const AbstractValue &b);
/// Bounds that grew go to ±∞; sets larger than 8 go to their top element.
AbstractValue widen(const AbstractValue &old_value, const AbstractValue &new_value);

/// Row count interval and (possibly open) column set of a data frame.
struct DataFrameShape {
  /// Known columns in first-introduction order.
  std::vector<std::string> columns;
  /// Whether there may be columns beyond `columns`.
  bool open = true;
  /// Row count bounds; nullopt when unknown.
  std::optional<std::pair<double, double>> rows;

  bool has_column(const std::string &c) const;
  bool known() const { return !open || !columns.empty() || rows.has_value(); }
  bool operator==(const DataFrameShape &) const = default;

  /// `a data frame with 4 rows, and known columns: a, b`.
  std::string render() const;
};

DataFrameShape join(const DataFrameShape &a, const DataFrameShape &b);

class ValueResolver;

/// Computes the shape produced by a call, given the resolver for its arguments.
using ShapeTransformer = std::function<DataFrameShape(ValueResolver &, NodeId call)>;

/// Transformers keyed by function name.
class ShapeTransformers {
public:
  static ShapeTransformers defaults();

  void set(std::string name, ShapeTransformer t) { rules_[std::move(name)] = std::move(t); }
  const ShapeTransformer *find(const std::string &name) const;

private:
  std::map<std::string, ShapeTransformer> rules_;
};

struct ResolverOptions {
  /// Joins per loop-carried definition before widening.
  int fuel = 2;
  /// Reads a data file for read.csv-like calls; nullopt when not readable.
  std::function<std::optional<std::string>(const std::string &)> read_file;
};

/// Memoizing resolver over one analyzed program. Not thread-safe; use one per thread.
class ValueResolver {
public:
  ValueResolver(const NormalizedAst &ast, const DataflowGraph &graph, ResolverOptions options = {},
                ShapeTransformers transformers = ShapeTransformers::defaults());

  AbstractValue value(NodeId node);
  DataFrameShape shape(NodeId node);

  /// Largest number of evaluation rounds any loop-carried value needed.
  int max_rounds() const { return max_rounds_; }

  const NormalizedAst &ast() const { return ast_; }
  const DataflowGraph &graph() const { return graph_; }
  const ResolverOptions &options() const { return options_; }

  /// Value node of the `position`-th positional argument (0-based) or of the argument
  /// called `name`.
  std::optional<NodeId> argument(NodeId call, std::size_t position,
                                 const std::string &name = {}) const;
  /// Number of elements of a literal vector expression, if evident.
  std::optional<double> length_of(NodeId node);

private:
  const NormalizedAst &ast_;
  const DataflowGraph &graph_;
  ResolverOptions options_;
  ShapeTransformers transformers_;

  std::map<NodeId, AbstractValue> memo_;
  std::map<NodeId, AbstractValue> approx_;
  std::vector<NodeId> stack_;
  std::vector<std::size_t> low_;
  std::map<NodeId, std::size_t> on_stack_;
  std::set<NodeId> hit_;
  int max_rounds_ = 0;

  std::map<NodeId, DataFrameShape> shape_memo_;
  std::set<NodeId> shape_active_;

  std::optional<NodeId> vertex_for(NodeId node) const;
  AbstractValue compute(NodeId vertex);
  AbstractValue compute_call(NodeId vertex);
  DataFrameShape compute_shape(NodeId vertex);
};

/// Truth of every if/while condition that the resolver can decide.
std::map<NodeId, Truth> condition_truths(const NormalizedAst &ast, ValueResolver &resolver);

} // namespace rflow
