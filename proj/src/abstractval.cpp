#include "rflow/abstractval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace rflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxSetSize = 8;
constexpr int kHardRoundCap = 64;

bool whole(double d) { return std::isfinite(d) && std::floor(d) == d; }

std::string format_number(double d, bool integral) {
  if (std::isinf(d))
    return d > 0 ? "Inf" : "-Inf";
  if (std::isnan(d))
    return "NaN";
  char buf[64];
  auto [end, ec] = whole(d) && std::abs(d) < 1e15
                       ? std::to_chars(buf, buf + sizeof buf, d, std::chars_format::fixed)
                       : std::to_chars(buf, buf + sizeof buf, d);
  std::string s(buf, end);
  if (integral && whole(d))
    s += "L";
  return s;
}

} // namespace

// ---- AbstractValue ----

AbstractValue::AbstractValue(Data d) : data_(std::move(d)) {}

AbstractValue AbstractValue::number(double v, bool integral) { return interval(v, v, integral); }

AbstractValue AbstractValue::interval(double lo, double hi, bool integral) {
  if (std::isnan(lo) || std::isnan(hi))
    return top();
  if (lo > hi)
    std::swap(lo, hi);
  return AbstractValue(Interval{lo, hi, integral});
}

AbstractValue AbstractValue::string(std::string s) {
  return AbstractValue(StringSet{{std::move(s)}, false});
}

AbstractValue AbstractValue::logical(bool v) { return AbstractValue(LogicalSet{v, !v}); }

std::optional<std::string> AbstractValue::single_string() const {
  if (auto *s = as_strings(); s && !s->any && s->values.size() == 1)
    return *s->values.begin();
  return std::nullopt;
}

Truth AbstractValue::truth() const {
  if (auto *l = as_logicals()) {
    if (l->can_true && !l->can_false)
      return Truth::AlwaysTrue;
    if (l->can_false && !l->can_true)
      return Truth::AlwaysFalse;
  }
  if (auto *i = as_interval()) {
    if (i->lo == 0 && i->hi == 0)
      return Truth::AlwaysFalse;
    if (i->lo > 0 || i->hi < 0)
      return Truth::AlwaysTrue;
  }
  return Truth::Unknown;
}

std::string AbstractValue::render() const {
  struct Visitor {
    std::string operator()(const Bottom &) const { return "⊥"; }
    std::string operator()(const Top &) const { return "⊤"; }
    std::string operator()(const Interval &i) const {
      return "[" + format_number(i.lo, i.integral) + ", " + format_number(i.hi, i.integral) + "]";
    }
    std::string operator()(const StringSet &s) const {
      if (s.any)
        return "⊤";
      std::string out;
      for (const auto &v : s.values) {
        if (!out.empty())
          out += ", ";
        out += "\"" + v + "\"";
      }
      return out;
    }
    std::string operator()(const LogicalSet &l) const {
      if (l.can_true && l.can_false)
        return "TRUE, FALSE";
      return l.can_true ? "TRUE" : "FALSE";
    }
  };
  return std::visit(Visitor{}, data_);
}

AbstractValue join(const AbstractValue &a, const AbstractValue &b) {
  if (a.is_bottom())
    return b;
  if (b.is_bottom())
    return a;
  if (a.is_top() || b.is_top() || a.data().index() != b.data().index())
    return AbstractValue::top();
  if (auto *x = a.as_interval()) {
    auto *y = b.as_interval();
    return AbstractValue::interval(std::min(x->lo, y->lo), std::max(x->hi, y->hi),
                                   x->integral && y->integral);
  }
  if (auto *x = a.as_strings()) {
    auto *y = b.as_strings();
    if (x->any || y->any)
      return AbstractValue(StringSet{{}, true});
    StringSet s = *x;
    s.values.insert(y->values.begin(), y->values.end());
    return AbstractValue(s);
  }
  auto *x = a.as_logicals();
  auto *y = b.as_logicals();
  return AbstractValue(LogicalSet{x->can_true || y->can_true, x->can_false || y->can_false});
}

AbstractValue widen(const AbstractValue &old_value, const AbstractValue &new_value) {
  if (old_value.is_bottom())
    return new_value;
  AbstractValue joined = join(old_value, new_value);
  if (auto *o = old_value.as_interval()) {
    if (auto *j = joined.as_interval())
      return AbstractValue::interval(j->lo < o->lo ? -kInf : o->lo, j->hi > o->hi ? kInf : o->hi,
                                     j->integral);
  }
  if (auto *s = joined.as_strings(); s && !s->any && s->values.size() > kMaxSetSize)
    return AbstractValue(StringSet{{}, true});
  return joined;
}

// ---- DataFrameShape ----

bool DataFrameShape::has_column(const std::string &c) const {
  return std::find(columns.begin(), columns.end(), c) != columns.end();
}

std::string DataFrameShape::render() const {
  std::string out = "a data frame with ";
  if (!rows)
    out += "an unknown number of rows";
  else if (rows->first == rows->second)
    out += format_number(rows->first, false) + (rows->first == 1 ? " row" : " rows");
  else
    out += "between " + format_number(rows->first, false) + " and " +
           format_number(rows->second, false) + " rows";
  out += ", and known columns: ";
  if (columns.empty())
    out += "none";
  for (std::size_t i = 0; i < columns.size(); ++i)
    out += (i ? ", " : "") + columns[i];
  if (open && !columns.empty())
    out += " (possibly more)";
  return out;
}

DataFrameShape join(const DataFrameShape &a, const DataFrameShape &b) {
  DataFrameShape out = a;
  for (const auto &c : b.columns)
    if (!out.has_column(c))
      out.columns.push_back(c);
  std::set<std::string> sa(a.columns.begin(), a.columns.end());
  std::set<std::string> sb(b.columns.begin(), b.columns.end());
  out.open = a.open || b.open || sa != sb;
  if (a.rows && b.rows)
    out.rows = std::pair{std::min(a.rows->first, b.rows->first),
                         std::max(a.rows->second, b.rows->second)};
  else
    out.rows.reset();
  return out;
}

// ---- arithmetic ----

namespace {

std::optional<Interval> numeric(const AbstractValue &v) {
  if (auto *i = v.as_interval())
    return *i;
  if (auto *l = v.as_logicals())
    return Interval{l->can_false ? 0.0 : 1.0, l->can_true ? 1.0 : 0.0, true};
  return std::nullopt;
}

double mul0(double a, double b) { return (a == 0 || b == 0) ? 0 : a * b; }

AbstractValue hull(std::initializer_list<double> xs, bool integral) {
  double lo = kInf, hi = -kInf;
  for (double x : xs) {
    if (std::isnan(x))
      return AbstractValue::top();
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return AbstractValue::interval(lo, hi, integral);
}

AbstractValue compare(const std::string &op, const AbstractValue &a, const AbstractValue &b) {
  auto sa = a.single_string(), sb = b.single_string();
  if (sa && sb && (op == "==" || op == "!="))
    return AbstractValue::logical((*sa == *sb) == (op == "=="));
  auto x = numeric(a), y = numeric(b);
  if (!x || !y)
    return AbstractValue::any_logical();
  bool can_true = true, can_false = true;
  if (op == "<") {
    can_true = x->lo < y->hi;
    can_false = x->hi >= y->lo;
  } else if (op == "<=") {
    can_true = x->lo <= y->hi;
    can_false = x->hi > y->lo;
  } else if (op == ">") {
    can_true = x->hi > y->lo;
    can_false = x->lo <= y->hi;
  } else if (op == ">=") {
    can_true = x->hi >= y->lo;
    can_false = x->lo < y->hi;
  } else {
    bool point_equal = x->lo == x->hi && y->lo == y->hi && x->lo == y->lo;
    bool disjoint = x->hi < y->lo || y->hi < x->lo;
    bool eq_true = !disjoint, eq_false = !point_equal;
    can_true = op == "==" ? eq_true : eq_false;
    can_false = op == "==" ? eq_false : eq_true;
  }
  return AbstractValue(LogicalSet{can_true, can_false});
}

AbstractValue logic(const std::string &op, const AbstractValue &a, const AbstractValue &b) {
  auto truth_set = [](const AbstractValue &v) -> std::pair<bool, bool> {
    switch (v.truth()) {
    case Truth::AlwaysTrue: return {true, false};
    case Truth::AlwaysFalse: return {false, true};
    default: return {true, true};
    }
  };
  auto [at, af] = truth_set(a);
  auto [bt, bf] = truth_set(b);
  if (op == "&&" || op == "&")
    return AbstractValue(LogicalSet{at && bt, af || bf});
  return AbstractValue(LogicalSet{at || bt, af && bf});
}

AbstractValue arithmetic(const std::string &op, const AbstractValue &a, const AbstractValue &b) {
  if (a.is_bottom() || b.is_bottom())
    return AbstractValue::bottom();
  if (op == "<" || op == "<=" || op == ">" || op == ">=" || op == "==" || op == "!=")
    return compare(op, a, b);
  if (op == "&&" || op == "||" || op == "&" || op == "|")
    return logic(op, a, b);
  auto x = numeric(a), y = numeric(b);
  if (!x || !y)
    return AbstractValue::top();
  bool integral = x->integral && y->integral;
  if (op == "+")
    return hull({x->lo + y->lo, x->hi + y->hi}, integral);
  if (op == "-")
    return hull({x->lo - y->hi, x->hi - y->lo}, integral);
  if (op == "*")
    return hull({mul0(x->lo, y->lo), mul0(x->lo, y->hi), mul0(x->hi, y->lo), mul0(x->hi, y->hi)},
                integral);
  if (op == "/") {
    if (y->lo <= 0 && y->hi >= 0)
      return AbstractValue::interval(-kInf, kInf, false);
    return hull({x->lo / y->lo, x->lo / y->hi, x->hi / y->lo, x->hi / y->hi}, false);
  }
  if (op == "^") {
    if (x->lo == x->hi && y->lo == y->hi)
      return AbstractValue::number(std::pow(x->lo, y->lo), integral && y->lo >= 0);
    if (y->lo == y->hi && whole(y->lo) && y->lo >= 0 && x->lo >= 0)
      return hull({std::pow(x->lo, y->lo), std::pow(x->hi, y->lo)}, integral);
    return AbstractValue::interval(-kInf, kInf, false);
  }
  if (op == ":")
    return hull({x->lo, x->hi, y->lo, y->hi}, x->integral);
  return AbstractValue::interval(-kInf, kInf, false);
}

AbstractValue literal_value(const AstNode &n) {
  switch (n.kind) {
  case NodeKind::StringLit: return AbstractValue::string(n.lexeme);
  case NodeKind::Logical:
    if (n.lexeme == "TRUE")
      return AbstractValue::logical(true);
    if (n.lexeme == "FALSE")
      return AbstractValue::logical(false);
    return AbstractValue::top();
  case NodeKind::Number: {
    std::string s = n.lexeme;
    if (s == "Inf")
      return AbstractValue::number(kInf, false);
    if (s == "NaN" || s.rfind("NA", 0) == 0)
      return AbstractValue::top();
    bool suffixed = !s.empty() && s.back() == 'L';
    if (suffixed)
      s.pop_back();
    if (!s.empty() && s.back() == 'i')
      return AbstractValue::top();
    double d = 0;
    try {
      if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X'))
        d = static_cast<double>(std::stoull(s.substr(2), nullptr, 16));
      else
        d = std::stod(s);
    } catch (const std::exception &) {
      return AbstractValue::top();
    }
    return AbstractValue::number(d, suffixed || whole(d));
  }
  default: return AbstractValue::top();
  }
}

} // namespace

// ---- ValueResolver ----

ValueResolver::ValueResolver(const NormalizedAst &ast, const DataflowGraph &graph,
                             ResolverOptions options, ShapeTransformers transformers)
    : ast_(ast), graph_(graph), options_(std::move(options)),
      transformers_(std::move(transformers)) {}

std::optional<NodeId> ValueResolver::vertex_for(NodeId node) const {
  if (!ast_.contains(node))
    return std::nullopt;
  if (graph_.has_vertex(node))
    return node;
  const AstNode &n = ast_[node];
  if ((n.kind == NodeKind::ExpressionList || n.kind == NodeKind::Argument) && !n.children.empty())
    return vertex_for(n.children.back());
  return std::nullopt;
}

AbstractValue ValueResolver::value(NodeId node) {
  auto v = vertex_for(node);
  if (!v)
    return AbstractValue::top();
  NodeId id = *v;
  if (auto it = memo_.find(id); it != memo_.end())
    return it->second;
  if (auto it = on_stack_.find(id); it != on_stack_.end()) {
    // Loop-carried: hand out the current approximation and mark the cycle.
    low_.back() = std::min(low_.back(), it->second);
    hit_.insert(id);
    return approx_[id];
  }

  std::size_t pos = stack_.size();
  stack_.push_back(id);
  low_.push_back(pos);
  on_stack_[id] = pos;
  approx_[id] = AbstractValue::bottom();

  AbstractValue result;
  int joins = 0;
  for (int round = 1;; ++round) {
    low_[pos] = pos;
    hit_.erase(id);
    AbstractValue computed = compute(id);
    max_rounds_ = std::max(max_rounds_, round);
    // Only the head of a cycle iterates; members report to their head.
    if (low_[pos] < pos || !hit_.count(id)) {
      result = computed;
      break;
    }
    AbstractValue next = joins < options_.fuel ? join(approx_[id], computed)
                                               : widen(approx_[id], computed);
    ++joins;
    if (next == approx_[id]) {
      result = next;
      break;
    }
    if (round >= kHardRoundCap) {
      result = AbstractValue::top();
      break;
    }
    approx_[id] = next;
  }
  hit_.erase(id);

  std::size_t low = low_[pos];
  stack_.pop_back();
  low_.pop_back();
  on_stack_.erase(id);
  approx_.erase(id);
  if (!low_.empty())
    low_.back() = std::min(low_.back(), low);
  if (low >= pos)
    memo_[id] = result;
  return result;
}

AbstractValue ValueResolver::compute(NodeId id) {
  const Vertex &v = graph_.vertex(id);
  const AstNode &n = ast_[id];
  switch (v.kind) {
  case VertexKind::Value: return literal_value(n);
  case VertexKind::Use: {
    auto defs = graph_.out_with(id, EdgeLabel::Reads);
    if (defs.empty())
      return AbstractValue::top();
    AbstractValue acc;
    for (NodeId d : defs)
      acc = join(acc, value(d));
    return acc;
  }
  case VertexKind::VariableDefinition: {
    auto it = graph_.definitions().find(id);
    if (it == graph_.definitions().end())
      return AbstractValue::top();
    const DefinitionInfo &info = it->second;
    if (info.kind == DefinitionKind::PartialUpdate)
      return AbstractValue::top();
    if (info.kind == DefinitionKind::Parameter) {
      auto args = graph_.out_with(id, EdgeLabel::DefinedByOnCall);
      if (args.empty() && !info.value)
        return AbstractValue::top();
      AbstractValue acc;
      if (info.value)
        acc = value(*info.value);
      for (NodeId a : args)
        acc = join(acc, value(a));
      return acc;
    }
    return info.value ? value(*info.value) : AbstractValue::top();
  }
  case VertexKind::FunctionDefinition: return AbstractValue::top();
  case VertexKind::FunctionCall: return compute_call(id);
  }
  return AbstractValue::top();
}

AbstractValue ValueResolver::compute_call(NodeId id) {
  const AstNode &n = ast_[id];
  switch (n.kind) {
  case NodeKind::Assignment: return value(n.children[1]);
  case NodeKind::BinaryOp:
    return arithmetic(n.lexeme, value(n.children[0]), value(n.children[1]));
  case NodeKind::UnaryOp: {
    AbstractValue x = value(n.children[0]);
    if (x.is_bottom())
      return x;
    if (n.lexeme == "!") {
      switch (x.truth()) {
      case Truth::AlwaysTrue: return AbstractValue::logical(false);
      case Truth::AlwaysFalse: return AbstractValue::logical(true);
      default: return AbstractValue::any_logical();
      }
    }
    auto i = numeric(x);
    if (!i)
      return AbstractValue::top();
    if (n.lexeme == "-")
      return AbstractValue::interval(-i->hi, -i->lo, i->integral);
    return AbstractValue(*i);
  }
  case NodeKind::If: {
    Truth t = value(n.children[0]).truth();
    bool has_else = n.children.size() > 2;
    if (t == Truth::AlwaysTrue)
      return value(n.children[1]);
    if (t == Truth::AlwaysFalse)
      return has_else ? value(n.children[2]) : AbstractValue::top();
    if (!has_else)
      return AbstractValue::top();
    return join(value(n.children[1]), value(n.children[2]));
  }
  case NodeKind::FunctionCall: break;
  default: return AbstractValue::top();
  }

  if (!graph_.out_with(id, EdgeLabel::Calls).empty()) {
    AbstractValue acc;
    for (NodeId r : graph_.out_with(id, EdgeLabel::Returns))
      acc = join(acc, value(r));
    return acc.is_bottom() ? AbstractValue::top() : acc;
  }
  if (!ast_.call_namespace(id).empty() || ast_[n.children[0]].kind != NodeKind::Symbol)
    return AbstractValue::top();
  if (!graph_.out_with(id, EdgeLabel::Reads).empty())
    return AbstractValue::top(); // callee bound to something we cannot see through
  std::string name = ast_.call_name(id);
  auto args = ast_.call_arguments(id);
  if (name == "c") {
    if (args.empty())
      return AbstractValue::top();
    AbstractValue acc;
    for (NodeId a : args)
      acc = join(acc, value(a));
    return acc;
  }
  if (name == "return" || name == "invisible")
    return args.empty() ? AbstractValue::top() : value(args.front());
  if (name == "paste" || name == "paste0" || name == "file.path") {
    std::string sep = name == "paste" ? " " : name == "paste0" ? "" : "/";
    std::string out;
    bool first = true;
    for (NodeId a : args) {
      const AstNode &arg = ast_[a];
      AbstractValue v = value(a);
      if (arg.lexeme == "sep") {
        auto s = v.single_string();
        if (!s)
          return AbstractValue(StringSet{{}, true});
        sep = *s;
        continue;
      }
      std::optional<std::string> piece = v.single_string();
      if (!piece) {
        auto *i = v.as_interval();
        if (!i || i->lo != i->hi)
          return AbstractValue(StringSet{{}, true});
        piece = format_number(i->lo, false);
      }
      out += (first ? "" : sep) + *piece;
      first = false;
    }
    return AbstractValue::string(out);
  }
  if (name == "length" || name == "nrow" || name == "ncol" || name == "nchar")
    return AbstractValue::interval(0, kInf, true);
  return AbstractValue::top();
}

std::optional<NodeId> ValueResolver::argument(NodeId call, std::size_t position,
                                              const std::string &name) const {
  std::size_t unnamed = 0;
  std::optional<NodeId> by_position;
  for (NodeId a : ast_.call_arguments(call)) {
    const AstNode &arg = ast_[a];
    if (arg.children.empty())
      continue;
    if (!name.empty() && arg.lexeme == name)
      return arg.children[0];
    if (arg.lexeme.empty() && unnamed++ == position && !by_position)
      by_position = arg.children[0];
  }
  return by_position;
}

std::optional<double> ValueResolver::length_of(NodeId node) {
  const AstNode &n = ast_[node];
  switch (n.kind) {
  case NodeKind::Number:
  case NodeKind::StringLit:
  case NodeKind::Logical: return 1.0;
  case NodeKind::FunctionCall: {
    if (ast_.call_name(node) != "c" || !ast_.call_namespace(node).empty())
      return std::nullopt;
    double total = 0;
    for (NodeId a : ast_.call_arguments(node)) {
      auto v = ast_.argument_value(a);
      auto len = v ? length_of(*v) : std::nullopt;
      if (!len)
        return std::nullopt;
      total += *len;
    }
    return total;
  }
  case NodeKind::BinaryOp: {
    if (n.lexeme != ":")
      return std::nullopt;
    AbstractValue from = value(n.children[0]), to = value(n.children[1]);
    auto a = from.as_interval();
    auto b = to.as_interval();
    if (!a || !b || a->lo != a->hi || b->lo != b->hi)
      return std::nullopt;
    return std::floor(std::abs(b->lo - a->lo)) + 1;
  }
  case NodeKind::Symbol: {
    auto defs = graph_.has_vertex(node) ? graph_.out_with(node, EdgeLabel::Reads)
                                        : std::vector<NodeId>{};
    if (defs.size() != 1)
      return std::nullopt;
    auto it = graph_.definitions().find(defs.front());
    if (it == graph_.definitions().end() || !it->second.value ||
        it->second.kind != DefinitionKind::Assignment)
      return std::nullopt;
    return length_of(*it->second.value);
  }
  default: return std::nullopt;
  }
}

DataFrameShape ValueResolver::shape(NodeId node) {
  auto v = vertex_for(node);
  if (!v)
    return {};
  if (auto it = shape_memo_.find(*v); it != shape_memo_.end())
    return it->second;
  if (!shape_active_.insert(*v).second)
    return {};
  DataFrameShape s = compute_shape(*v);
  shape_active_.erase(*v);
  shape_memo_[*v] = s;
  return s;
}

DataFrameShape ValueResolver::compute_shape(NodeId id) {
  const Vertex &v = graph_.vertex(id);
  switch (v.kind) {
  case VertexKind::Use: {
    auto defs = graph_.out_with(id, EdgeLabel::Reads);
    if (defs.empty())
      return {};
    DataFrameShape acc = shape(defs.front());
    for (std::size_t i = 1; i < defs.size(); ++i)
      acc = join(acc, shape(defs[i]));
    return acc;
  }
  case VertexKind::VariableDefinition: {
    auto it = graph_.definitions().find(id);
    if (it == graph_.definitions().end())
      return {};
    if (it->second.kind == DefinitionKind::PartialUpdate) {
      auto priors = graph_.out_with(id, EdgeLabel::Reads);
      if (priors.empty())
        return {};
      DataFrameShape s = shape(priors.front());
      for (std::size_t i = 1; i < priors.size(); ++i)
        s = join(s, shape(priors[i]));
      // `df$col <- value` adds or replaces one column.
      for (NodeId call : graph_.out_with(id, EdgeLabel::DefinedBy)) {
        const AstNode &assign = ast_[call];
        if (assign.kind != NodeKind::Assignment)
          continue;
        const AstNode &target = ast_[assign.children[0]];
        if (target.kind == NodeKind::Index && (target.lexeme == "$" || target.lexeme == "[[") &&
            target.children[0] == id && target.children.size() > 1) {
          const AstNode &field = ast_[target.children[1]];
          std::string col = field.kind == NodeKind::Argument && !field.children.empty()
                                ? ast_[field.children[0]].lexeme
                                : field.lexeme;
          if (!s.has_column(col))
            s.columns.push_back(col);
          return s;
        }
      }
      s.open = true;
      return s;
    }
    if (it->second.value)
      return shape(*it->second.value);
    return {};
  }
  case VertexKind::FunctionCall: {
    const AstNode &n = ast_[id];
    if (n.kind == NodeKind::Assignment)
      return shape(n.children[1]);
    if (n.kind == NodeKind::If && n.children.size() > 2)
      return join(shape(n.children[1]), shape(n.children[2]));
    if (n.kind != NodeKind::FunctionCall)
      return {};
    if (!graph_.out_with(id, EdgeLabel::Calls).empty()) {
      auto rs = graph_.out_with(id, EdgeLabel::Returns);
      if (rs.empty())
        return {};
      DataFrameShape acc = shape(rs.front());
      for (std::size_t i = 1; i < rs.size(); ++i)
        acc = join(acc, shape(rs[i]));
      return acc;
    }
    if (!graph_.out_with(id, EdgeLabel::Reads).empty())
      return {};
    if (const ShapeTransformer *t = transformers_.find(ast_.call_name(id)))
      return (*t)(*this, id);
    return {};
  }
  default: return {};
  }
}

// ---- transformers ----

namespace {

std::vector<std::string> split_record(const std::string &line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  auto flush = [&] {
    std::size_t b = cur.find_first_not_of(" \t\r");
    std::size_t e = cur.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cur.substr(b, e - b + 1));
    cur.clear();
  };
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"') {
      if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else {
        quoted = !quoted;
      }
    } else if (!quoted && (sep == ' ' ? (c == ' ' || c == '\t') : c == sep)) {
      if (sep == ' ' && cur.empty())
        continue;
      flush();
    } else {
      cur += c;
    }
  }
  if (!cur.empty() || sep != ' ')
    flush();
  return out;
}

ShapeTransformer table_reader(char sep) {
  return [sep](ValueResolver &r, NodeId call) {
    DataFrameShape unknown;
    auto file = r.argument(call, 0, "file");
    if (!file || !r.options().read_file)
      return unknown;
    auto path = r.value(*file).single_string();
    if (!path)
      return unknown;
    auto content = r.options().read_file(*path);
    if (!content)
      return unknown;
    std::istringstream in(*content);
    std::string line;
    if (!std::getline(in, line))
      return unknown;
    DataFrameShape s;
    s.open = false;
    s.columns = split_record(line, sep);
    double rows = 0;
    while (std::getline(in, line))
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        ++rows;
    s.rows = std::pair{rows, rows};
    return s;
  };
}

DataFrameShape constructor(ValueResolver &r, NodeId call) {
  const NormalizedAst &ast = r.ast();
  DataFrameShape s;
  s.open = false;
  double rows = 0;
  bool rows_known = true, first = true;
  for (NodeId a : ast.call_arguments(call)) {
    const AstNode &arg = ast[a];
    if (arg.children.empty())
      continue;
    if (arg.lexeme == "stringsAsFactors" || arg.lexeme == "check.names")
      continue;
    const AstNode &value = ast[arg.children[0]];
    if (!arg.lexeme.empty())
      s.columns.push_back(arg.lexeme);
    else if (value.kind == NodeKind::Symbol)
      s.columns.push_back(value.lexeme);
    else
      s.open = true;
    auto len = r.length_of(value.id);
    if (!len)
      rows_known = false;
    else if (first || rows == 1)
      rows = *len;
    else if (*len != 1 && *len != rows)
      rows_known = false;
    first = false;
  }
  if (rows_known)
    s.rows = std::pair{rows, rows};
  return s;
}

DataFrameShape input_shape(ValueResolver &r, NodeId call) {
  auto df = r.argument(call, 0, ".data");
  return df ? r.shape(*df) : DataFrameShape{};
}

// Named arguments after the data argument.
std::vector<std::pair<std::string, NodeId>> verb_args(ValueResolver &r, NodeId call) {
  std::vector<std::pair<std::string, NodeId>> out;
  auto df = r.argument(call, 0, ".data");
  for (NodeId a : r.ast().call_arguments(call)) {
    const AstNode &arg = r.ast()[a];
    if (arg.children.empty() || (df && arg.children[0] == *df))
      continue;
    out.emplace_back(arg.lexeme, arg.children[0]);
  }
  return out;
}

DataFrameShape mutate(ValueResolver &r, NodeId call) {
  DataFrameShape s = input_shape(r, call);
  for (const auto &[name, value] : verb_args(r, call)) {
    if (name.empty() || name[0] == '.')
      s.open = s.open || name.empty();
    else if (!s.has_column(name))
      s.columns.push_back(name);
  }
  return s;
}

DataFrameShape select(ValueResolver &r, NodeId call) {
  const NormalizedAst &ast = r.ast();
  DataFrameShape in = input_shape(r, call);
  std::vector<std::string> keep, drop;
  bool unknown = false;
  for (const auto &[name, value] : verb_args(r, call)) {
    const AstNode &v = ast[value];
    if (v.kind == NodeKind::UnaryOp && v.lexeme == "-" &&
        (ast[v.children[0]].kind == NodeKind::Symbol ||
         ast[v.children[0]].kind == NodeKind::StringLit))
      drop.push_back(ast[v.children[0]].lexeme);
    else if (v.kind == NodeKind::Symbol || v.kind == NodeKind::StringLit)
      keep.push_back(name.empty() ? v.lexeme : name);
    else
      unknown = true;
  }
  DataFrameShape out = in;
  if (unknown || (!keep.empty() && !drop.empty())) {
    out.open = true;
    return out;
  }
  if (!keep.empty()) {
    out.columns = keep;
    out.open = false;
    return out;
  }
  out.columns.clear();
  for (const auto &c : in.columns)
    if (std::find(drop.begin(), drop.end(), c) == drop.end())
      out.columns.push_back(c);
  return out;
}

DataFrameShape filter(ValueResolver &r, NodeId call) {
  DataFrameShape s = input_shape(r, call);
  if (s.rows)
    s.rows->first = 0;
  return s;
}

DataFrameShape identity(ValueResolver &r, NodeId call) { return input_shape(r, call); }

DataFrameShape rename(ValueResolver &r, NodeId call) {
  DataFrameShape s = input_shape(r, call);
  for (const auto &[name, value] : verb_args(r, call)) {
    const AstNode &v = r.ast()[value];
    if (name.empty() || (v.kind != NodeKind::Symbol && v.kind != NodeKind::StringLit)) {
      s.open = true;
      continue;
    }
    auto it = std::find(s.columns.begin(), s.columns.end(), v.lexeme);
    if (it != s.columns.end())
      *it = name;
    else
      s.columns.push_back(name);
  }
  return s;
}

DataFrameShape summarise(ValueResolver &r, NodeId call) {
  DataFrameShape s;
  for (const auto &[name, value] : verb_args(r, call))
    if (!name.empty())
      s.columns.push_back(name);
  s.open = true;
  return s;
}

enum class JoinKind { Left, Inner, Right, Full };

ShapeTransformer joiner(JoinKind kind) {
  return [kind](ValueResolver &r, NodeId call) {
    DataFrameShape a = input_shape(r, call);
    auto y = r.argument(call, 1, "y");
    DataFrameShape b = y ? r.shape(*y) : DataFrameShape{};
    std::vector<std::string> keys;
    bool keys_known = true;
    if (auto by = r.argument(call, 2, "by")) {
      AbstractValue v = r.value(*by);
      auto *s = v.as_strings();
      if (s && !s->any)
        keys.assign(s->values.begin(), s->values.end());
      else
        keys_known = false;
    } else {
      for (const auto &c : a.columns)
        if (b.has_column(c))
          keys.push_back(c);
      keys_known = !a.open && !b.open;
    }
    auto is_key = [&](const std::string &c) {
      return std::find(keys.begin(), keys.end(), c) != keys.end();
    };
    DataFrameShape out;
    out.open = a.open || b.open || !keys_known;
    // Left non-key columns, then the keys, then the right non-key columns.
    for (const auto &c : a.columns)
      if (!is_key(c))
        out.columns.push_back(c);
    for (const auto &k : keys)
      out.columns.push_back(k);
    for (const auto &c : b.columns)
      if (!is_key(c) && !out.has_column(c))
        out.columns.push_back(c);
    switch (kind) {
    case JoinKind::Left: out.rows = a.rows; break;
    case JoinKind::Inner:
      if (a.rows)
        out.rows = std::pair{0.0, a.rows->second};
      break;
    default: break;
    }
    return out;
  };
}

} // namespace

ShapeTransformers ShapeTransformers::defaults() {
  ShapeTransformers t;
  t.set("data.frame", constructor);
  t.set("tibble", constructor);
  t.set("read.csv", table_reader(','));
  t.set("read_csv", table_reader(','));
  t.set("read.delim", table_reader('\t'));
  t.set("read_tsv", table_reader('\t'));
  t.set("read.table", table_reader(' '));
  t.set("mutate", mutate);
  t.set("select", select);
  t.set("filter", filter);
  t.set("rename", rename);
  t.set("arrange", identity);
  t.set("group_by", identity);
  t.set("ungroup", identity);
  t.set("distinct", filter);
  t.set("summarise", summarise);
  t.set("summarize", summarise);
  t.set("left_join", joiner(JoinKind::Left));
  t.set("inner_join", joiner(JoinKind::Inner));
  t.set("right_join", joiner(JoinKind::Right));
  t.set("full_join", joiner(JoinKind::Full));
  return t;
}

const ShapeTransformer *ShapeTransformers::find(const std::string &name) const {
  auto it = rules_.find(name);
  return it == rules_.end() ? nullptr : &it->second;
}

std::map<NodeId, Truth> condition_truths(const NormalizedAst &ast, ValueResolver &resolver) {
  std::map<NodeId, Truth> out;
  for (const AstNode &n : ast.nodes())
    if (n.kind == NodeKind::If || n.kind == NodeKind::While)
      out[n.children[0]] = resolver.value(n.children[0]).truth();
  return out;
}

} // namespace rflow
