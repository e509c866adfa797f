#include "rflow/slicer.hpp"

#include <charconv>
#include <deque>

namespace rflow {

std::string_view direction_name(SliceDirection d) {
  switch (d) {
  case SliceDirection::Backward: return "backward";
  case SliceDirection::Forward: return "forward";
  case SliceDirection::Chop: return "chop";
  }
  return "?";
}

namespace {

std::optional<int> to_int(std::string_view s) {
  int v = 0;
  if (s.empty())
    return std::nullopt;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    return std::nullopt;
  return v;
}

[[noreturn]] void no_match(const std::string &c) {
  throw CriterionError("criterion " + c + " does not match");
}

bool is_loop(NodeKind k) {
  return k == NodeKind::While || k == NodeKind::For || k == NodeKind::Repeat;
}

} // namespace

NodeId resolve_criterion(const std::string &c, const NormalizedAst &ast) {
  if (!c.empty() && c[0] == '$') {
    auto id = to_int(std::string_view(c).substr(1));
    if (!id || *id < 0)
      throw CriterionError("malformed criterion " + c);
    if (!ast.contains(static_cast<NodeId>(*id)))
      throw CriterionError("criterion " + c + " is out of range");
    return static_cast<NodeId>(*id);
  }
  if (auto colon = c.find(':'); colon != std::string::npos) {
    auto line = to_int(std::string_view(c).substr(0, colon));
    auto col = to_int(std::string_view(c).substr(colon + 1));
    if (!line || !col)
      throw CriterionError("malformed criterion " + c);
    std::optional<NodeId> best;
    for (const AstNode &n : ast.nodes()) {
      if (n.range.start != Position{*line, *col})
        continue;
      if (!best || n.range.end < ast[*best].range.end)
        best = n.id;
    }
    if (!best)
      no_match(c);
    return *best;
  }
  if (auto at = c.find('@'); at != std::string::npos) {
    auto line = to_int(std::string_view(c).substr(0, at));
    std::string name = c.substr(at + 1);
    if (!line || name.empty())
      throw CriterionError("malformed criterion " + c);
    std::optional<NodeId> best;
    for (const AstNode &n : ast.nodes()) {
      if (n.kind != NodeKind::Symbol || n.lexeme != name || n.range.start.line != *line)
        continue;
      if (!best || n.range.start < ast[*best].range.start)
        best = n.id;
    }
    if (!best)
      no_match(c);
    return *best;
  }
  throw CriterionError("malformed criterion " + c);
}

Slicer::Slicer(const NormalizedAst &ast, const DataflowGraph &graph,
               const BuiltInRegistry &registry)
    : ast_(ast), graph_(graph), registry_(registry) {
  // Jump statements decide whether the rest of their loop or function runs.
  std::map<NodeId, std::set<NodeId>> jumps;
  for (const AstNode &n : ast.nodes()) {
    bool is_return = n.kind == NodeKind::FunctionCall && ast.call_name(n.id) == "return" &&
                     ast[n.children[0]].kind == NodeKind::Symbol;
    if (n.kind != NodeKind::Break && n.kind != NodeKind::Next && !is_return)
      continue;
    for (auto p = n.parent; p; p = ast[*p].parent) {
      NodeKind k = ast[*p].kind;
      if ((!is_return && is_loop(k)) || k == NodeKind::FunctionDefinition) {
        if (is_return == (k == NodeKind::FunctionDefinition))
          jumps[*p].insert(n.id);
        break;
      }
    }
  }

  for (const auto &[id, v] : graph.vertices()) {
    std::set<NodeId> &ctl = controllers_[id];
    NodeId child = id;
    for (auto p = ast[id].parent; p; child = *p, p = ast[*p].parent) {
      const AstNode &a = ast[*p];
      bool in_body = false;
      if (a.kind == NodeKind::If && child != a.children[0]) {
        if (auto c = value_vertex(a.children[0]))
          ctl.insert(*c);
      } else if (a.kind == NodeKind::While && child == a.children[1]) {
        if (auto c = value_vertex(a.children[0]))
          ctl.insert(*c);
        in_body = true;
      } else if (a.kind == NodeKind::For && child == a.children[2]) {
        ctl.insert(a.id);
        in_body = true;
      } else if (a.kind == NodeKind::Repeat) {
        in_body = true;
      } else if (a.kind == NodeKind::FunctionDefinition) {
        if (child == a.children.back())
          for (NodeId j : jumps[a.id])
            if (j != id)
              ctl.insert(j);
        break;
      }
      if (in_body)
        for (NodeId j : jumps[a.id])
          if (j != id)
            ctl.insert(j);
    }
    for (NodeId c : ctl)
      governed_[c].insert(id);
  }
}

std::optional<NodeId> Slicer::value_vertex(NodeId node) const {
  if (graph_.has_vertex(node))
    return node;
  const AstNode &n = ast_[node];
  if (n.kind == NodeKind::ExpressionList && !n.children.empty())
    return value_vertex(n.children.back());
  return std::nullopt;
}

const std::set<NodeId> &Slicer::controllers(NodeId vertex) const {
  static const std::set<NodeId> none;
  auto it = controllers_.find(vertex);
  return it == controllers_.end() ? none : it->second;
}

NodeSet Slicer::vertices_for(NodeId node) const {
  for (std::optional<NodeId> p = node; p; p = ast_[*p].parent)
    if (graph_.has_vertex(*p))
      return {*p};
  NodeSet out;
  for (const auto &[id, v] : graph_.vertices())
    if (ast_.is_ancestor(node, id))
      out.insert(id);
  return out;
}

NodeSet Slicer::closure(const NodeSet &start, bool backward) const {
  NodeSet seen;
  std::deque<NodeId> work;
  for (NodeId s : start)
    for (NodeId v : vertices_for(s))
      if (seen.insert(v).second)
        work.push_back(v);
  auto visit = [&](NodeId n) {
    if (seen.insert(n).second)
      work.push_back(n);
  };
  while (!work.empty()) {
    NodeId v = work.front();
    work.pop_front();
    if (backward) {
      for (NodeId n : graph_.successors(v))
        visit(n);
      for (NodeId n : controllers(v))
        visit(n);
    } else {
      for (NodeId n : graph_.predecessors(v))
        visit(n);
      if (auto it = governed_.find(v); it != governed_.end())
        for (NodeId n : it->second)
          visit(n);
    }
  }
  return seen;
}

SliceResult Slicer::finish(SliceDirection d, const NodeSet &criteria, NodeSet included) const {
  included.insert(criteria.begin(), criteria.end());
  if (d == SliceDirection::Backward) {
    // Keep the library() calls that load packages the slice uses.
    std::set<std::string> packages;
    for (NodeId id : included)
      if (graph_.has_vertex(id) && graph_.vertex(id).kind == VertexKind::FunctionCall &&
          graph_.vertex(id).ns.empty())
        if (const auto &pkg = registry_.lookup(graph_.vertex(id).name).package; !pkg.empty())
          packages.insert(pkg);
    for (const AstNode &n : ast_.nodes()) {
      if (n.kind != NodeKind::FunctionCall || !graph_.has_vertex(n.id) ||
          registry_.tag(ast_.call_name(n.id)) != Tag::LibraryLoad)
        continue;
      auto args = ast_.call_arguments(n.id);
      if (args.empty())
        continue;
      auto value = ast_.argument_value(args.front());
      if (value && (ast_[*value].kind == NodeKind::Symbol ||
                    ast_[*value].kind == NodeKind::StringLit) &&
          packages.count(ast_[*value].lexeme))
        included.insert(n.id);
    }
  }
  SliceResult r;
  r.direction = d;
  r.criterion_ids = criteria;
  for (NodeId c : criteria)
    r.criteria.push_back("$" + std::to_string(c));
  r.lines = reprint_lines(ast_, included);
  r.text = reprint(ast_, included);
  r.included = std::move(included);
  return r;
}

SliceResult Slicer::backward(const NodeSet &criteria) const {
  return finish(SliceDirection::Backward, criteria, closure(criteria, true));
}

SliceResult Slicer::forward(const NodeSet &criteria) const {
  return finish(SliceDirection::Forward, criteria, closure(criteria, false));
}

SliceResult Slicer::chop(const NodeSet &sources, const NodeSet &sinks) const {
  NodeSet fwd = closure(sources, false);
  NodeSet bwd = closure(sinks, true);
  fwd.insert(sources.begin(), sources.end());
  bwd.insert(sinks.begin(), sinks.end());
  NodeSet both;
  for (NodeId id : fwd)
    if (bwd.count(id))
      both.insert(id);
  NodeSet criteria;
  for (NodeId id : sources)
    if (both.count(id))
      criteria.insert(id);
  for (NodeId id : sinks)
    if (both.count(id))
      criteria.insert(id);
  return finish(SliceDirection::Chop, criteria, std::move(both));
}

NodeSet Slicer::resolve_all(const std::vector<std::string> &criteria) const {
  NodeSet out;
  for (const std::string &c : criteria)
    out.insert(resolve_criterion(c, ast_));
  return out;
}

SliceResult Slicer::backward(const std::vector<std::string> &criteria) const {
  SliceResult r = backward(resolve_all(criteria));
  r.criteria = criteria;
  return r;
}

SliceResult Slicer::forward(const std::vector<std::string> &criteria) const {
  SliceResult r = forward(resolve_all(criteria));
  r.criteria = criteria;
  return r;
}

SliceResult Slicer::chop(const std::vector<std::string> &sources,
                         const std::vector<std::string> &sinks) const {
  SliceResult r = chop(resolve_all(sources), resolve_all(sinks));
  r.criteria = sources;
  r.criteria.insert(r.criteria.end(), sinks.begin(), sinks.end());
  return r;
}

} // namespace rflow
