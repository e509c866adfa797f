#include "rflow/queries.hpp"

#include <sstream>

using nlohmann::json;

namespace rflow {

namespace {

// Calls of built-in functions (no user definition shadows them).
std::vector<NodeId> builtin_calls(const Analysis &a) {
  std::vector<NodeId> out;
  for (const auto &[id, v] : a.graph().vertices())
    if (v.kind == VertexKind::FunctionCall && a.ast()[id].kind == NodeKind::FunctionCall &&
        resolve_call_targets(a.graph(), id).empty())
      out.push_back(id);
  return out;
}

bool is_plus(const AstNode &n) { return n.kind == NodeKind::BinaryOp && n.lexeme == "+"; }

class PlotRoots {
public:
  PlotRoots(const Analysis &a, const std::set<NodeId> &creates) : a_(a), creates_(creates) {}

  // Create call an expression evaluates to, following `+` left operands and variables.
  std::optional<NodeId> root(NodeId expr) {
    if (!seen_.insert(expr).second)
      return std::nullopt;
    const NormalizedAst &ast = a_.ast();
    const AstNode &n = ast[expr];
    if (creates_.count(expr))
      return expr;
    if (is_plus(n))
      return root(n.children[0]);
    if (n.kind == NodeKind::Assignment)
      return root(n.children[1]);
    if (n.kind == NodeKind::Symbol && a_.graph().has_vertex(expr)) {
      for (NodeId def : a_.graph().out_with(expr, EdgeLabel::Reads)) {
        auto it = a_.graph().definitions().find(def);
        if (it == a_.graph().definitions().end() || !it->second.value)
          continue;
        if (auto r = root(*it->second.value))
          return r;
      }
    }
    return std::nullopt;
  }

private:
  const Analysis &a_;
  const std::set<NodeId> &creates_;
  std::set<NodeId> seen_;
};

// Whether `a` runs before `b` on every path to `b`.
bool dominates(const Analysis &an, const Dominators &dom, NodeId a, NodeId b) {
  const Cfg &cfg = an.cfg_for(b);
  auto pa = locate(cfg, an.ast(), a), pb = locate(cfg, an.ast(), b);
  if (!pa || !pb)
    return false;
  if (pa->block != pb->block)
    return dom.dominates(pa->block, pb->block);
  if (pa->index != pb->index)
    return pa->index < pb->index;
  return an.ast()[a].range.end < an.ast()[b].range.start;
}

std::string library_name(const Analysis &a, ValueResolver &resolver, NodeId call) {
  const NormalizedAst &ast = a.ast();
  std::optional<NodeId> pkg;
  bool character_only = false;
  int positional = 0;
  for (NodeId arg : ast.call_arguments(call)) {
    auto v = ast.argument_value(arg);
    if (!v)
      continue;
    const std::string &name = ast[arg].lexeme;
    if (name == "package")
      pkg = v;
    else if (name == "character.only")
      character_only = resolver.value(*v).truth() == Truth::AlwaysTrue;
    else if (name.empty() && positional++ == 0 && !pkg)
      pkg = v;
  }
  if (!pkg)
    return "⊤";
  const AstNode &n = ast[*pkg];
  if (n.kind == NodeKind::Symbol && !character_only)
    return n.lexeme;
  if (n.kind == NodeKind::StringLit)
    return n.lexeme;
  AbstractValue value = resolver.value(*pkg);
  if (auto s = value.single_string())
    return *s;
  return value.render();
}

json position_json(Position p) { return {{"line", p.line}, {"column", p.col}}; }

json range_json(const Range &r) { return {{"start", position_json(r.start)}, {"end", position_json(r.end)}}; }

} // namespace

PlotLinks link_plot_addons(const Analysis &a) {
  const NormalizedAst &ast = a.ast();
  const BuiltInRegistry &reg = a.registry();
  std::vector<NodeId> calls = builtin_calls(a);

  std::set<NodeId> creates, base_creates;
  for (NodeId c : calls) {
    const Semantics &s = reg.lookup(ast.call_name(c));
    if (s.tag != Tag::PlotCreate)
      continue;
    creates.insert(c);
    if (s.base_graphics)
      base_creates.insert(c);
  }

  PlotLinks out;
  for (NodeId c : creates)
    out.linked[c];
  std::map<const Cfg *, Dominators> doms;

  for (NodeId c : calls) {
    const Semantics &s = reg.lookup(ast.call_name(c));
    if (s.tag != Tag::PlotAddon)
      continue;
    std::optional<NodeId> target;
    if (s.via_plus) {
      // Only addons that are operands of `+` draw on anything.
      NodeId top = c;
      while (ast[top].parent && is_plus(ast[*ast[top].parent]))
        top = *ast[top].parent;
      if (top == c)
        continue;
      target = PlotRoots(a, creates).root(top);
    } else {
      const Cfg &cfg = a.cfg_for(c);
      const Dominators &dom = doms.try_emplace(&cfg, cfg).first->second;
      std::vector<NodeId> before;
      for (NodeId p : base_creates)
        if (&a.cfg_for(p) == &cfg && dominates(a, dom, p, c))
          before.push_back(p);
      // Dominating creates form a chain; the last one is dominated by all others.
      for (NodeId p : before) {
        bool last = std::all_of(before.begin(), before.end(),
                                [&](NodeId q) { return q == p || dominates(a, dom, q, p); });
        if (last)
          target = p;
      }
    }
    if (target)
      out.linked[*target].push_back(c);
    else
      out.unlinked.push_back(c);
  }
  for (auto &[_, v] : out.linked)
    std::sort(v.begin(), v.end(), [&](NodeId x, NodeId y) { return ast[x].range < ast[y].range; });
  return out;
}

DependencyReport dependencies(const Analysis &a) {
  const NormalizedAst &ast = a.ast();
  const BuiltInRegistry &reg = a.registry();
  auto resolver = a.resolver();
  DependencyReport report;
  std::set<std::string> namespaced;

  std::vector<NodeId> calls = builtin_calls(a);
  std::sort(calls.begin(), calls.end(),
            [&](NodeId x, NodeId y) { return ast[x].range < ast[y].range; });

  for (NodeId c : calls) {
    std::string name = ast.call_name(c);
    const Semantics &s = reg.lookup(name);
    if (std::string ns = ast.call_namespace(c); !ns.empty() && namespaced.insert(ns).second)
      report.libraries.push_back({ns, "::", ast[c].children[0]});
    switch (s.tag) {
    case Tag::LibraryLoad:
      report.libraries.push_back({library_name(a, *resolver, c), name == "library" ? "library" : "require", c});
      break;
    case Tag::FileRead:
    case Tag::FileWrite: {
      auto p = path_argument(ast, c, s);
      FileAccess f{name, p ? resolver->value(*p).render() : "⊤", c};
      (s.tag == Tag::FileRead ? report.reads : report.writes).push_back(std::move(f));
      break;
    }
    default: break;
    }
  }

  PlotLinks links = link_plot_addons(a);
  for (auto &[create, linked] : links.linked)
    report.visualizations.push_back({ast.call_name(create), create, linked});
  std::sort(report.visualizations.begin(), report.visualizations.end(),
            [&](const Visualization &x, const Visualization &y) {
              return ast[x.node].range < ast[y.node].range;
            });
  report.unlinked = links.unlinked;
  return report;
}

std::string render_tree(const DependencyReport &r, const Analysis &a) {
  std::ostringstream out;
  auto at = [&](NodeId n) { return " @ " + to_string(a.locate(n).range.start); };
  auto group = [&](const char *title, std::size_t size) {
    out << title << " (" << size << ")\n";
    if (size == 0)
      out << "  (none)\n";
  };
  group("Libraries", r.libraries.size());
  for (const auto &l : r.libraries)
    out << "  " << l.name << " via " << l.via << at(l.node) << '\n';
  group("Reads", r.reads.size());
  for (const auto &f : r.reads)
    out << "  " << f.function << ' ' << f.path << at(f.node) << '\n';
  group("Writes", r.writes.size());
  for (const auto &f : r.writes)
    out << "  " << f.function << ' ' << f.path << at(f.node) << '\n';
  group("Visualizations", r.visualizations.size());
  for (const auto &v : r.visualizations) {
    out << "  " << v.function << at(v.node) << '\n';
    for (NodeId l : v.linked)
      out << "    + " << a.ast().call_name(l) << at(l) << '\n';
  }
  if (!r.unlinked.empty()) {
    out << "Unlinked plot calls (" << r.unlinked.size() << ")\n";
    for (NodeId u : r.unlinked)
      out << "  " << a.ast().call_name(u) << at(u) << '\n';
  }
  return out.str();
}

json to_json(const Location &loc, bool with_cell) {
  json j{{"line", loc.range.start.line},
         {"column", loc.range.start.col},
         {"endLine", loc.range.end.line},
         {"endColumn", loc.range.end.col}};
  if (with_cell)
    j["cell"] = loc.cell;
  return j;
}

json location_json(const Analysis &a, const Range &range) {
  return to_json(a.locate(range), a.format() != DocumentFormat::R);
}

json location_json(const Analysis &a, NodeId node) { return location_json(a, a.ast()[node].range); }

json to_json(const DependencyReport &r, const Analysis &a) {
  const NormalizedAst &ast = a.ast();
  auto call = [&](NodeId n) { return json{{"function", ast.call_name(n)}, {"location", location_json(a, n)}}; };
  auto files = [&](const std::vector<FileAccess> &fs) {
    json arr = json::array();
    for (const auto &f : fs) {
      json j{{"function", f.function}, {"path", f.path}, {"location", location_json(a, f.node)}};
      if (f.function == "source")
        j["via"] = "source";
      arr.push_back(std::move(j));
    }
    return arr;
  };
  json libs = json::array();
  for (const auto &l : r.libraries)
    libs.push_back({{"name", l.name}, {"via", l.via}, {"location", location_json(a, l.node)}});
  json vis = json::array();
  for (const auto &v : r.visualizations) {
    json linked = json::array();
    for (NodeId l : v.linked)
      linked.push_back(call(l));
    vis.push_back({{"function", v.function}, {"location", location_json(a, v.node)}, {"linked", linked}});
  }
  json unlinked = json::array();
  for (NodeId u : r.unlinked)
    unlinked.push_back(call(u));
  return {{"libraries", libs},
          {"reads", files(r.reads)},
          {"writes", files(r.writes)},
          {"visualizations", vis},
          {"unlinked", unlinked}};
}

json to_json(const Diagnostic &d, const Analysis &a) {
  json j{{"rule", d.rule},
         {"severity", severity_name(d.severity)},
         {"message", d.message},
         {"location", location_json(a, d.range)},
         {"range", range_json(d.range)}};
  if (d.certainty)
    j["certainty"] = certainty_name(*d.certainty);
  if (d.fix) {
    json edits = json::array();
    for (const auto &e : d.fix->edits)
      edits.push_back({{"start", position_json(e.start)}, {"end", position_json(e.end)}, {"text", e.text}});
    j["fix"] = {{"title", d.fix->title}, {"edits", edits}};
  }
  return j;
}

json to_json(const LintReport &r, const Analysis &a) {
  json diags = json::array();
  for (std::size_t i = 0; i < r.diagnostics.size(); ++i) {
    json d = to_json(r.diagnostics[i], a);
    d["index"] = i;
    diags.push_back(std::move(d));
  }
  json status = json::object();
  for (const auto &[rule, s] : r.status) {
    status[rule] = {{"state", rule_state_name(s.state)}};
    if (!s.reason.empty())
      status[rule]["reason"] = s.reason;
  }
  return {{"diagnostics", diags}, {"rules", status}};
}

json to_json(const SliceResult &s) {
  return {{"direction", direction_name(s.direction)},
          {"criteria", s.criteria},
          {"ids", std::vector<NodeId>(s.included.begin(), s.included.end())},
          {"lines", std::vector<int>(s.lines.begin(), s.lines.end())},
          {"code", s.text}};
}

namespace {

std::vector<std::string> criteria_of(const json &q, const char *key) {
  if (!q.contains(key))
    throw CriterionError(std::string("missing \"") + key + "\"");
  const json &c = q.at(key);
  if (c.is_string())
    return {c.get<std::string>()};
  if (!c.is_array() || c.empty())
    throw CriterionError(std::string("\"") + key + "\" must be a non-empty list of criteria");
  return c.get<std::vector<std::string>>();
}

json resolve_value_query(const Analysis &a, const json &q) {
  auto resolver = a.resolver();
  json results = json::array();
  for (const std::string &c : criteria_of(q, "criteria")) {
    try {
      NodeId id = resolve_criterion(c, a.ast());
      results.push_back({{"criterion", c}, {"node", id}, {"value", resolver->value(id).render()}});
    } catch (const CriterionError &e) {
      results.push_back({{"criterion", c}, {"error", e.what()}});
    }
  }
  return {{"results", results}};
}

json df_shape_query(const Analysis &a, const json &q) {
  std::vector<std::string> cs = criteria_of(q, "criterion");
  NodeId id = resolve_criterion(cs.at(0), a.ast());
  DataFrameShape s = a.resolver()->shape(id);
  json rows = nullptr;
  if (s.rows) {
    auto bound = [](double v) { return std::isinf(v) ? json(nullptr) : json(v); };
    rows = {{"min", bound(s.rows->first)}, {"max", bound(s.rows->second)}};
  }
  return {{"criterion", cs[0]}, {"node", id},   {"shape", s.render()},
          {"columns", s.columns}, {"open", s.open}, {"rows", rows}};
}

json static_slice_query(const Analysis &a, const json &q) {
  std::vector<std::string> cs = criteria_of(q, "criteria");
  std::string dir = q.value("direction", "backward");
  if (dir == "backward")
    return to_json(a.slicer().backward(cs));
  if (dir == "forward")
    return to_json(a.slicer().forward(cs));
  throw CriterionError("unknown slice direction \"" + dir + "\"");
}

json lint_query(const Analysis &a, const json &q, const QueryOptions &o) {
  static const Linter builtin = Linter::builtin();
  LintReport r = (o.linter ? *o.linter : builtin).lint(a, o.lint);
  if (q.contains("rules")) {
    auto keep = q.at("rules").get<std::set<std::string>>();
    std::erase_if(r.diagnostics, [&](const Diagnostic &d) { return !keep.count(d.rule); });
    std::erase_if(r.status, [&](const auto &kv) { return !keep.count(kv.first); });
  }
  return to_json(r, a);
}

} // namespace

json run_query(const Analysis &a, const json &queries, const QueryOptions &options) {
  json out = json::object();
  if (!queries.is_array()) {
    out["error"] = {{"error", "queries must be a list"}};
    return out;
  }
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const json &q = queries[i];
    std::string type = q.is_object() && q.contains("type") && q["type"].is_string()
                           ? q["type"].get<std::string>()
                           : "#" + std::to_string(i);
    int n = ++seen[type];
    std::string key = n == 1 ? type : type + "#" + std::to_string(n);
    try {
      if (type == "dependencies")
        out[key] = to_json(dependencies(a), a);
      else if (type == "resolve-value")
        out[key] = resolve_value_query(a, q);
      else if (type == "df-shape")
        out[key] = df_shape_query(a, q);
      else if (type == "static-slice")
        out[key] = static_slice_query(a, q);
      else if (type == "lint")
        out[key] = lint_query(a, q, options);
      else if (type[0] == '#')
        out[key] = {{"error", "query without a type"}};
      else
        out[key] = {{"error", "unknown query type \"" + type + "\""}};
    } catch (const CriterionError &e) {
      out[key] = {{"error", e.what()}};
    } catch (const json::exception &e) {
      out[key] = {{"error", std::string("malformed query: ") + e.what()}};
    }
  }
  return out;
}

} // namespace rflow
