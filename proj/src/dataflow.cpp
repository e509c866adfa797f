#include "rflow/dataflow.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace rflow {

std::string_view vertex_kind_name(VertexKind k) {
  switch (k) {
  case VertexKind::Value: return "value";
  case VertexKind::Use: return "use";
  case VertexKind::VariableDefinition: return "variable-definition";
  case VertexKind::FunctionDefinition: return "function-definition";
  case VertexKind::FunctionCall: return "function-call";
  }
  return "?";
}

std::vector<std::string_view> EdgeLabels::names() const {
  static const std::pair<EdgeLabel, std::string_view> order[] = {
      {EdgeLabel::Reads, "reads"},
      {EdgeLabel::Returns, "returns"},
      {EdgeLabel::DefinedBy, "defined-by"},
      {EdgeLabel::DefinedByOnCall, "defined-by-on-call"},
      {EdgeLabel::Calls, "calls"},
      {EdgeLabel::Argument, "argument"},
  };
  std::vector<std::string_view> out;
  for (const auto &[label, name] : order)
    if (has(label))
      out.push_back(name);
  return out;
}

// ---- DataflowGraph ----

void DataflowGraph::add_vertex(Vertex v) {
  auto [it, inserted] = vertices_.try_emplace(v.id, v);
  if (inserted)
    ++revision_;
}

bool DataflowGraph::add_edge(NodeId from, NodeId to, EdgeLabels labels) {
  EdgeLabels &cur = edges_[{from, to}];
  EdgeLabels merged = cur | labels;
  if (merged == cur && !cur.empty())
    return false;
  cur = merged;
  out_[from].insert(to);
  in_[to].insert(from);
  ++revision_;
  return true;
}

EdgeLabels DataflowGraph::edge(NodeId from, NodeId to) const {
  auto it = edges_.find({from, to});
  return it == edges_.end() ? EdgeLabels{} : it->second;
}

const std::set<NodeId> &DataflowGraph::successors(NodeId id) const {
  static const std::set<NodeId> none;
  auto it = out_.find(id);
  return it == out_.end() ? none : it->second;
}

const std::set<NodeId> &DataflowGraph::predecessors(NodeId id) const {
  static const std::set<NodeId> none;
  auto it = in_.find(id);
  return it == in_.end() ? none : it->second;
}

std::vector<NodeId> DataflowGraph::out_with(NodeId id, EdgeLabel label) const {
  std::vector<NodeId> out;
  for (NodeId to : successors(id))
    if (edge(id, to).has(label))
      out.push_back(to);
  return out;
}

std::vector<NodeId> DataflowGraph::in_with(NodeId id, EdgeLabel label) const {
  std::vector<NodeId> out;
  for (NodeId from : predecessors(id))
    if (edge(from, id).has(label))
      out.push_back(from);
  return out;
}

// ---- Environment ----

std::pair<std::set<NodeId>, std::size_t>
Environment::lookup_with_depth(const std::string &name) const {
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    auto it = frames_[i].find(name);
    if (it != frames_[i].end() && !it->second.empty())
      return {it->second, i};
  }
  return {{}, frames_.size()};
}

std::set<NodeId> Environment::assign(const std::string &name, NodeId def) {
  std::set<NodeId> &slot = frames_.front()[name];
  std::set<NodeId> old = std::move(slot);
  slot = {def};
  return old;
}

std::set<NodeId> Environment::super_assign(const std::string &name, NodeId def) {
  Frame *target = &frames_.back();
  for (std::size_t i = 1; i < frames_.size(); ++i) {
    auto it = frames_[i].find(name);
    if (it != frames_[i].end() && !it->second.empty()) {
      target = &frames_[i];
      break;
    }
  }
  std::set<NodeId> &slot = (*target)[name];
  std::set<NodeId> old = std::move(slot);
  slot = {def};
  return old;
}

Environment Environment::merge(const Environment &a, const Environment &b) {
  if (a.frames_.size() != b.frames_.size())
    throw std::logic_error("merging environments of different depth");
  Environment out = a;
  for (std::size_t i = 0; i < b.frames_.size(); ++i)
    for (const auto &[name, defs] : b.frames_[i])
      out.frames_[i][name].insert(defs.begin(), defs.end());
  return out;
}

// ---- builder ----

namespace {

std::string literal_name(const AstNode &n) {
  if (n.kind == NodeKind::StringLit)
    return "\"" + n.lexeme + "\"";
  return n.lexeme;
}

class Builder {
public:
  Builder(const NormalizedAst &ast, const BuiltInRegistry &registry, const DataflowOptions &options,
          std::set<std::string> &active_sources)
      : ast_(ast), registry_(registry), options_(options), active_sources_(active_sources) {}

  DataflowResult run() {
    visit(ast_.root());
    for (const auto &[name, defs] : env_.global())
      for (NodeId d : defs)
        if (graph_.definitions().count(d))
          graph_.mark_live_at_exit(d);

    std::set<NodeId> uses, calls;
    for (const auto &[id, v] : graph_.vertices()) {
      if (v.kind == VertexKind::Use && graph_.out_with(id, EdgeLabel::Reads).empty())
        uses.insert(id);
      if (v.kind == VertexKind::FunctionCall && named_calls_.count(id) &&
          graph_.out_with(id, EdgeLabel::Reads).empty() &&
          graph_.out_with(id, EdgeLabel::Calls).empty() &&
          registry_.tag(v.name) == Tag::PureUnknown && v.ns.empty())
        calls.insert(id);
    }
    graph_.set_unresolved(std::move(calls), std::move(uses));

    DataflowResult result;
    result.graph = std::move(graph_);
    result.exit_env = std::move(env_);
    result.sourced = std::move(sourced_);
    return result;
  }

private:
  struct FunctionRecord {
    std::set<std::pair<NodeId, std::string>> free_uses;
    std::set<std::pair<NodeId, std::string>> free_calls;
    std::set<std::pair<std::string, NodeId>> super_assigns;
  };
  struct FunctionContext {
    NodeId fdef;
    std::set<NodeId> returns;
  };
  struct LoopContext {
    std::optional<Environment> breaks;
    std::vector<Environment> nexts;
  };
  using Args = std::vector<std::pair<std::string, NodeId>>;

  const NormalizedAst &ast_;
  const BuiltInRegistry &registry_;
  const DataflowOptions &options_;
  std::set<std::string> &active_sources_;

  DataflowGraph graph_;
  Environment env_;
  std::vector<FunctionContext> functions_;
  std::vector<LoopContext> loops_;
  std::map<NodeId, FunctionRecord> records_;
  std::map<NodeId, Args> call_args_;
  std::set<NodeId> named_calls_;
  std::set<NodeId> applying_;
  std::map<NodeId, std::set<std::string>> sourced_;

  void add(const AstNode &n, VertexKind kind, std::string name, std::string ns = {}) {
    graph_.add_vertex(Vertex{n.id, kind, std::move(name), std::move(ns), n.range});
  }

  std::optional<NodeId> current_function() const {
    if (functions_.empty())
      return std::nullopt;
    return functions_.back().fdef;
  }

  // A binding is local to the innermost function only when found in its own frame.
  bool free_in_function(std::size_t depth, bool found) const {
    return !functions_.empty() && (!found || depth > 0);
  }

  std::optional<NodeId> visit(NodeId id) {
    const AstNode &n = ast_[id];
    switch (n.kind) {
    case NodeKind::Number:
    case NodeKind::StringLit:
    case NodeKind::Logical:
    case NodeKind::Null: add(n, VertexKind::Value, literal_name(n)); return id;
    case NodeKind::Symbol: return visit_use(n);
    case NodeKind::Namespace:
      add(n, VertexKind::Value, ast_[n.children[1]].lexeme, ast_[n.children[0]].lexeme);
      return id;
    case NodeKind::Argument:
    case NodeKind::Parameter:
      if (n.children.empty())
        return std::nullopt;
      return visit(n.children[0]);
    case NodeKind::ExpressionList: {
      std::optional<NodeId> last;
      for (NodeId c : n.children)
        last = visit(c);
      return last;
    }
    case NodeKind::Assignment: return visit_assignment(n);
    case NodeKind::BinaryOp:
    case NodeKind::UnaryOp: {
      add(n, VertexKind::FunctionCall, n.lexeme);
      for (NodeId c : n.children)
        if (auto v = visit(c))
          graph_.add_edge(id, *v, EdgeLabel::Argument);
      return id;
    }
    case NodeKind::Index: {
      add(n, VertexKind::FunctionCall, n.lexeme);
      if (auto v = visit(n.children[0]))
        graph_.add_edge(id, *v, EdgeLabel::Argument);
      if (n.lexeme == "[" || n.lexeme == "[[")
        for (std::size_t i = 1; i < n.children.size(); ++i)
          if (auto v = visit(n.children[i]))
            graph_.add_edge(id, *v, EdgeLabel::Argument);
      return id;
    }
    case NodeKind::If: return visit_if(n);
    case NodeKind::While: return visit_while(n);
    case NodeKind::For: return visit_for(n);
    case NodeKind::Repeat: return visit_repeat(n);
    case NodeKind::Break:
    case NodeKind::Next: {
      add(n, VertexKind::FunctionCall, n.kind == NodeKind::Break ? "break" : "next");
      if (!loops_.empty()) {
        LoopContext &loop = loops_.back();
        if (n.kind == NodeKind::Next)
          loop.nexts.push_back(env_);
        else
          loop.breaks = loop.breaks ? Environment::merge(*loop.breaks, env_) : env_;
      }
      return id;
    }
    case NodeKind::FunctionDefinition: return visit_function(n);
    case NodeKind::FunctionCall: return visit_call(n);
    default: return std::nullopt;
    }
  }

  NodeId visit_use(const AstNode &n) {
    add(n, VertexKind::Use, n.lexeme);
    auto [defs, depth] = env_.lookup_with_depth(n.lexeme);
    for (NodeId d : defs)
      graph_.add_edge(n.id, d, EdgeLabel::Reads);
    if (free_in_function(depth, !defs.empty()))
      records_[functions_.back().fdef].free_uses.insert({n.id, n.lexeme});
    return n.id;
  }

  // Root object of a replacement target such as `df$a[i]` or `names(x)`.
  std::optional<NodeId> target_base(NodeId id) const {
    const AstNode &n = ast_[id];
    switch (n.kind) {
    case NodeKind::Symbol:
    case NodeKind::StringLit: return id;
    case NodeKind::Index: return target_base(n.children[0]);
    case NodeKind::FunctionCall: {
      auto args = ast_.call_arguments(id);
      if (args.empty())
        return std::nullopt;
      if (auto v = ast_.argument_value(args[0]))
        return target_base(*v);
      return std::nullopt;
    }
    default: return std::nullopt;
    }
  }

  // Visits the index expressions of a replacement target, skipping the path to its base.
  void visit_target_parts(NodeId id, NodeId call) {
    const AstNode &n = ast_[id];
    if (n.kind == NodeKind::Index) {
      visit_target_parts(n.children[0], call);
      if (n.lexeme == "[" || n.lexeme == "[[")
        for (std::size_t i = 1; i < n.children.size(); ++i)
          if (auto v = visit(n.children[i]))
            graph_.add_edge(call, *v, EdgeLabel::Argument);
    } else if (n.kind == NodeKind::FunctionCall) {
      auto args = ast_.call_arguments(id);
      for (std::size_t i = 0; i < args.size(); ++i) {
        auto value = ast_.argument_value(args[i]);
        if (!value)
          continue;
        if (i == 0)
          visit_target_parts(*value, call);
        else if (auto v = visit(*value))
          graph_.add_edge(call, *v, EdgeLabel::Argument);
      }
    }
  }

  NodeId visit_assignment(const AstNode &n) {
    NodeId id = n.id;
    auto value = visit(n.children[1]);
    add(n, VertexKind::FunctionCall, n.lexeme);
    if (value)
      graph_.add_edge(id, *value, EdgeLabel::Reads | EdgeLabel::Argument);

    const AstNode &target = ast_[n.children[0]];
    auto base = target_base(target.id);
    if (!base) {
      if (auto v = visit(target.id))
        graph_.add_edge(id, *v, EdgeLabel::Argument);
      return id;
    }
    const AstNode &def = ast_[*base];
    bool super = n.lexeme == "<<-";
    bool partial = *base != target.id;
    if (partial) {
      visit_target_parts(target.id, id);
      add(def, VertexKind::VariableDefinition, def.lexeme);
      for (NodeId prior : env_.lookup(def.lexeme))
        graph_.add_edge(def.id, prior, EdgeLabel::Reads);
    } else {
      add(def, VertexKind::VariableDefinition, def.lexeme);
    }
    graph_.add_edge(id, def.id, EdgeLabel::Returns | EdgeLabel::Argument);
    if (value)
      graph_.add_edge(def.id, *value, EdgeLabel::DefinedBy);
    graph_.add_edge(def.id, id, EdgeLabel::DefinedBy);

    DefinitionInfo info;
    info.kind = partial ? DefinitionKind::PartialUpdate
                        : (super ? DefinitionKind::SuperAssignment : DefinitionKind::Assignment);
    info.value = value;
    if (super)
      info.scope = functions_.size() > 1 ? std::optional(functions_[functions_.size() - 2].fdef)
                                         : std::nullopt;
    else
      info.scope = current_function();
    graph_.set_definition(def.id, info);

    if (super) {
      env_.super_assign(def.lexeme, def.id);
      if (!functions_.empty())
        records_[functions_.back().fdef].super_assigns.insert({def.lexeme, def.id});
    } else {
      env_.assign(def.lexeme, def.id);
    }
    return id;
  }

  NodeId visit_if(const AstNode &n) {
    NodeId id = n.id;
    add(n, VertexKind::FunctionCall, "if");
    if (auto c = visit(n.children[0]))
      graph_.add_edge(id, *c, EdgeLabel::Reads | EdgeLabel::Argument);
    Environment before = env_;
    auto then_value = visit(n.children[1]);
    Environment after_then = std::move(env_);
    env_ = std::move(before);
    std::optional<NodeId> else_value;
    if (n.children.size() > 2)
      else_value = visit(n.children[2]);
    env_ = Environment::merge(after_then, env_);
    if (then_value)
      graph_.add_edge(id, *then_value, EdgeLabel::Returns);
    if (else_value)
      graph_.add_edge(id, *else_value, EdgeLabel::Returns);
    return id;
  }

  std::size_t iteration_cap() const { return std::max<std::size_t>(ast_.size(), 2); }

  // Runs `step` until neither the environment nor the graph changes.
  template <typename Step> void fixpoint(Step step) {
    for (std::size_t i = 0; i < iteration_cap(); ++i) {
      auto revision = graph_.revision();
      Environment start = env_;
      step();
      LoopContext &loop = loops_.back();
      for (const Environment &e : loop.nexts)
        env_ = Environment::merge(env_, e);
      loop.nexts.clear();
      env_ = Environment::merge(start, env_);
      if (env_ == start && graph_.revision() == revision)
        break;
    }
  }

  void finish_loop() {
    LoopContext loop = std::move(loops_.back());
    loops_.pop_back();
    if (loop.breaks)
      env_ = Environment::merge(env_, *loop.breaks);
  }

  NodeId visit_while(const AstNode &n) {
    NodeId id = n.id;
    add(n, VertexKind::FunctionCall, "while");
    loops_.emplace_back();
    fixpoint([&] {
      if (auto c = visit(n.children[0]))
        graph_.add_edge(id, *c, EdgeLabel::Reads | EdgeLabel::Argument);
      visit(n.children[1]);
    });
    finish_loop();
    return id;
  }

  NodeId visit_repeat(const AstNode &n) {
    add(n, VertexKind::FunctionCall, "repeat");
    loops_.emplace_back();
    fixpoint([&] { visit(n.children[0]); });
    finish_loop();
    return n.id;
  }

  NodeId visit_for(const AstNode &n) {
    NodeId id = n.id;
    add(n, VertexKind::FunctionCall, "for");
    auto seq = visit(n.children[1]);
    if (seq)
      graph_.add_edge(id, *seq, EdgeLabel::Reads | EdgeLabel::Argument);
    const AstNode &var = ast_[n.children[0]];
    add(var, VertexKind::VariableDefinition, var.lexeme);
    if (seq)
      graph_.add_edge(var.id, *seq, EdgeLabel::DefinedBy);
    graph_.add_edge(var.id, id, EdgeLabel::DefinedBy);
    graph_.set_definition(var.id, DefinitionInfo{DefinitionKind::LoopVariable, seq, current_function()});
    loops_.emplace_back();
    fixpoint([&] {
      env_.assign(var.lexeme, var.id);
      visit(n.children[2]);
    });
    finish_loop();
    return id;
  }

  NodeId visit_function(const AstNode &n) {
    NodeId id = n.id;
    add(n, VertexKind::FunctionDefinition, "function");
    std::vector<NodeId> params(n.children.begin(), n.children.end() - 1);
    graph_.function(id).parameters = params;

    Environment saved_env = env_;
    std::vector<LoopContext> saved_loops = std::move(loops_);
    loops_.clear();
    env_.push_frame();
    functions_.push_back({id, {}});

    for (NodeId p : params) {
      const AstNode &param = ast_[p];
      add(param, VertexKind::VariableDefinition, param.lexeme);
      std::optional<NodeId> value;
      if (!param.children.empty())
        value = visit(param.children[0]);
      graph_.add_edge(p, value ? *value : id, EdgeLabel::DefinedBy);
      graph_.set_definition(p, DefinitionInfo{DefinitionKind::Parameter, value, id});
      env_.assign(param.lexeme, p);
    }
    auto body = visit(n.children.back());

    FunctionInfo &info = graph_.function(id);
    info.results.insert(functions_.back().returns.begin(), functions_.back().returns.end());
    if (body)
      info.results.insert(*body);
    for (const auto &[name, defs] : env_.frames().front())
      for (NodeId d : defs)
        if (graph_.definitions().count(d))
          graph_.mark_live_at_exit(d);

    functions_.pop_back();
    loops_ = std::move(saved_loops);
    env_ = std::move(saved_env);
    return id;
  }

  // FunctionDefinition vertices a definition's value may evaluate to.
  void function_values(NodeId def, std::set<NodeId> &out, std::set<NodeId> &seen) const {
    if (!seen.insert(def).second)
      return;
    auto it = graph_.definitions().find(def);
    if (it == graph_.definitions().end() || !it->second.value)
      return;
    NodeId value = *it->second.value;
    const Vertex &v = graph_.vertex(value);
    if (v.kind == VertexKind::FunctionDefinition)
      out.insert(value);
    else if (v.kind == VertexKind::Use)
      for (NodeId d : graph_.out_with(value, EdgeLabel::Reads))
        function_values(d, out, seen);
  }

  bool literal_definition(NodeId def) const {
    auto it = graph_.definitions().find(def);
    return it != graph_.definitions().end() && it->second.value &&
           graph_.vertex(*it->second.value).kind == VertexKind::Value;
  }

  // Links a call whose callee is the symbol `name` to what `name` means in env_.
  void resolve_named_call(NodeId call, const std::string &name) {
    std::set<NodeId> targets;
    for (NodeId d : env_.lookup(name)) {
      // R skips non-function bindings when looking up a function name.
      if (literal_definition(d))
        continue;
      graph_.add_edge(call, d, EdgeLabel::Reads);
      std::set<NodeId> seen;
      function_values(d, targets, seen);
    }
    for (NodeId t : targets)
      link_call(call, t);
  }

  void link_call(NodeId call, NodeId fdef) {
    graph_.add_edge(call, fdef, EdgeLabel::Calls);
    const FunctionInfo info = graph_.function(fdef);
    const Args &args = call_args_[call];

    std::vector<bool> bound(info.parameters.size(), false);
    std::optional<std::size_t> dots;
    for (std::size_t i = 0; i < info.parameters.size(); ++i)
      if (ast_[info.parameters[i]].lexeme == "...")
        dots = i;
    auto bind = [&](std::size_t p, NodeId arg) {
      graph_.add_edge(info.parameters[p], arg, EdgeLabel::DefinedByOnCall);
      if (!dots || p != *dots)
        bound[p] = true;
    };
    std::vector<NodeId> positional;
    for (const auto &[name, arg] : args) {
      bool matched = false;
      if (!name.empty())
        for (std::size_t i = 0; i < info.parameters.size() && !matched; ++i)
          if (ast_[info.parameters[i]].lexeme == name && (!dots || i != *dots)) {
            bind(i, arg);
            matched = true;
          }
      if (!matched) {
        if (!name.empty() && dots)
          bind(*dots, arg);
        else if (name.empty())
          positional.push_back(arg);
      }
    }
    std::size_t next = 0;
    for (NodeId arg : positional) {
      while (next < info.parameters.size() && bound[next] && (!dots || next != *dots))
        ++next;
      if (next == info.parameters.size())
        break;
      bind(next, arg);
      if (!dots || next != *dots)
        ++next;
    }
    for (NodeId r : info.results)
      graph_.add_edge(call, r, EdgeLabel::Returns);

    if (applying_.count(fdef))
      return;
    applying_.insert(fdef);
    FunctionRecord record = records_[fdef];
    for (const auto &[use, name] : record.free_uses)
      for (NodeId d : env_.lookup(name))
        graph_.add_edge(use, d, EdgeLabel::Reads);
    for (const auto &[inner, name] : record.free_calls)
      resolve_named_call(inner, name);
    for (const auto &[name, def] : record.super_assigns)
      env_.super_assign(name, def);
    applying_.erase(fdef);
  }

  void inline_source(NodeId call, const Args &args) {
    if (!options_.load_source || args.empty())
      return;
    const AstNode &arg = ast_[args.front().second];
    if (arg.kind != NodeKind::StringLit || active_sources_.count(arg.lexeme))
      return;
    auto text = options_.load_source(arg.lexeme);
    if (!text)
      return;
    try {
      NormalizedAst sub = parse_normalized(*text);
      active_sources_.insert(arg.lexeme);
      DataflowResult r = Builder(sub, registry_, options_, active_sources_).run();
      active_sources_.erase(arg.lexeme);
      std::set<std::string> names;
      for (const auto &[name, defs] : r.exit_env.global())
        if (!defs.empty()) {
          env_.assign(name, call);
          names.insert(name);
        }
      sourced_[call] = std::move(names);
    } catch (const ParseError &) {
      active_sources_.erase(arg.lexeme);
    }
  }

  NodeId visit_call(const AstNode &n) {
    NodeId id = n.id;
    const AstNode &callee = ast_[n.children[0]];
    std::string name = ast_.call_name(id);
    std::string ns = ast_.call_namespace(id);
    add(n, VertexKind::FunctionCall, name, ns);

    bool library = callee.kind == NodeKind::Symbol && registry_.tag(name) == Tag::LibraryLoad;
    // library(pkg, character.only = TRUE) evaluates pkg
    for (NodeId arg : ast_.call_arguments(id))
      if (library && ast_[arg].lexeme == "character.only") {
        auto v = ast_.argument_value(arg);
        library = !(v && ast_[*v].kind == NodeKind::Logical && ast_[*v].lexeme == "TRUE");
      }
    Args args;
    bool first_positional = true;
    for (std::size_t i = 1; i < n.children.size(); ++i) {
      const AstNode &a = ast_[n.children[i]];
      if (a.children.empty())
        continue;
      const AstNode &value = ast_[a.children[0]];
      std::optional<NodeId> v;
      if (library && first_positional && a.lexeme.empty() && value.kind == NodeKind::Symbol) {
        add(value, VertexKind::Value, value.lexeme);
        v = value.id;
      } else {
        v = visit(value.id);
      }
      if (a.lexeme.empty())
        first_positional = false;
      if (v) {
        graph_.add_edge(id, *v, EdgeLabel::Argument);
        args.emplace_back(a.lexeme, *v);
      }
    }
    call_args_[id] = args;

    if (callee.kind == NodeKind::Symbol) {
      named_calls_.insert(id);
      if (name == "return" && !functions_.empty())
        functions_.back().returns.insert(id);
      auto [defs, depth] = env_.lookup_with_depth(name);
      resolve_named_call(id, name);
      if (free_in_function(depth, !defs.empty()))
        records_[functions_.back().fdef].free_calls.insert({id, name});
      if (defs.empty() && registry_.tag(name) == Tag::FileRead && name == "source")
        inline_source(id, args);
    } else if (callee.kind == NodeKind::Namespace) {
      named_calls_.insert(id);
    } else if (auto cv = visit(callee.id)) {
      graph_.add_edge(id, *cv, EdgeLabel::Reads);
      if (graph_.vertex(*cv).kind == VertexKind::FunctionDefinition)
        link_call(id, *cv);
    }
    return id;
  }
};

} // namespace

DataflowResult build_dataflow(const NormalizedAst &ast, const BuiltInRegistry &registry,
                              const DataflowOptions &options) {
  std::set<std::string> active;
  if (!ast.source().origin().empty())
    active.insert(ast.source().origin());
  return Builder(ast, registry, options, active).run();
}

std::set<NodeId> resolve_call_targets(const DataflowGraph &graph, NodeId call) {
  if (!graph.has_vertex(call) || graph.vertex(call).kind != VertexKind::FunctionCall)
    throw std::invalid_argument("node " + std::to_string(call) + " is not a function call");
  std::set<NodeId> out;
  for (NodeId t : graph.out_with(call, EdgeLabel::Calls))
    out.insert(t);
  for (NodeId d : graph.out_with(call, EdgeLabel::Reads)) {
    auto it = graph.definitions().find(d);
    if (it != graph.definitions().end() && it->second.value &&
        graph.vertex(*it->second.value).kind == VertexKind::FunctionDefinition)
      out.insert(*it->second.value);
  }
  return out;
}

namespace {

std::string join_labels(EdgeLabels labels) {
  std::string s;
  for (auto name : labels.names()) {
    if (!s.empty())
      s += ", ";
    s += name;
  }
  return s;
}

std::string display_name(const Vertex &v) {
  return v.ns.empty() ? v.name : v.ns + "::" + v.name;
}

} // namespace

std::string render_ascii(const DataflowGraph &graph) {
  std::ostringstream out;
  out << "Vertices:\n";
  for (const auto &[id, v] : graph.vertices()) {
    out << id << ' ' << vertex_kind_name(v.kind);
    if (!v.name.empty())
      out << ' ' << display_name(v);
    out << '\n';
  }
  out << "Edges:\n";
  for (const auto &[key, labels] : graph.edges())
    out << key.first << " -> " << key.second << ": " << join_labels(labels) << '\n';
  if (!graph.unresolved_uses().empty()) {
    out << "unresolved:";
    bool first = true;
    for (NodeId u : graph.unresolved_uses()) {
      out << (first ? " " : ", ") << graph.vertex(u).name << '<' << u << '>';
      first = false;
    }
    out << '\n';
  }
  return out.str();
}

std::string render_mermaid(const DataflowGraph &graph) {
  auto escape = [](const std::string &s) {
    std::string r;
    for (char c : s) {
      if (c == '"')
        r += "#quot;";
      else if (c == '\n')
        r += ' ';
      else
        r += c;
    }
    return r;
  };
  std::ostringstream out;
  out << "flowchart TD\n";
  for (const auto &[id, v] : graph.vertices()) {
    out << "    n" << id << "[\"" << id << ": " << escape(display_name(v)) << " ("
        << vertex_kind_name(v.kind) << ")\"]\n";
  }
  for (const auto &[key, labels] : graph.edges())
    out << "    n" << key.first << " -->|\"" << join_labels(labels) << "\"| n" << key.second
        << '\n';
  return out.str();
}

} // namespace rflow
