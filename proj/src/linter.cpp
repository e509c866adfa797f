#include "rflow/linter.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace fs = std::filesystem;
using nlohmann::json;

namespace rflow {

std::string_view severity_name(Severity s) {
  switch (s) {
  case Severity::Error: return "error";
  case Severity::Warning: return "warning";
  case Severity::Info: return "info";
  }
  return "warning";
}

std::optional<Severity> parse_severity(std::string_view s) {
  for (auto v : {Severity::Error, Severity::Warning, Severity::Info})
    if (severity_name(v) == s)
      return v;
  return std::nullopt;
}

std::string_view certainty_name(Certainty c) {
  return c == Certainty::Exact ? "exact" : "approximate";
}

std::string_view rule_state_name(RuleStatus::State s) {
  switch (s) {
  case RuleStatus::State::Active: return "active";
  case RuleStatus::State::Disabled: return "disabled";
  case RuleStatus::State::Inactive: return "inactive";
  }
  return "active";
}

LintConfig LintConfig::from_json(const json &j) {
  LintConfig c;
  const json &rules = j.contains("rules") ? j.at("rules") : j;
  if (rules.is_object())
    for (const auto &[id, settings] : rules.items())
      c.rules[id] = settings;
  return c;
}

bool LintConfig::enabled(const std::string &rule) const {
  auto it = rules.find(rule);
  if (it == rules.end())
    return true;
  if (it->second.is_boolean())
    return it->second.get<bool>();
  return it->second.value("enabled", true);
}

const json &LintConfig::settings(const std::string &rule) const {
  static const json empty = json::object();
  auto it = rules.find(rule);
  return it != rules.end() && it->second.is_object() ? it->second : empty;
}

std::optional<NodeId> path_argument(const NormalizedAst &ast, NodeId call, const Semantics &s) {
  int positional = 0;
  for (NodeId a : ast.call_arguments(call)) {
    const AstNode &arg = ast[a];
    if (arg.children.empty())
      continue;
    if (!arg.lexeme.empty()) {
      if (std::find(s.path_names.begin(), s.path_names.end(), arg.lexeme) != s.path_names.end())
        return arg.children[0];
      continue;
    }
    if (positional++ == s.path_position)
      return arg.children[0];
  }
  return std::nullopt;
}

namespace {

// ---- shared helpers ----

bool is_absolute_path(const std::string &p) {
  if (p.empty())
    return false;
  if (p[0] == '/' || p[0] == '~')
    return true;
  return p.size() >= 3 && std::isalpha(static_cast<unsigned char>(p[0])) && p[1] == ':' &&
         (p[2] == '/' || p[2] == '\\');
}

std::string r_string(const std::string &value, char quote) {
  std::string out(1, quote);
  for (char c : value) {
    if (c == '\\' || c == quote)
      out += '\\';
    out += c;
  }
  return out + quote;
}

// Calls of file functions with their path argument.
template <class F> void for_each_file_call(const Analysis &a, F &&f) {
  const NormalizedAst &ast = a.ast();
  for (const auto &[id, v] : a.graph().vertices()) {
    if (v.kind != VertexKind::FunctionCall || ast[id].kind != NodeKind::FunctionCall)
      continue;
    const Semantics &s = a.registry().lookup(v.name);
    if (s.tag != Tag::FileRead && s.tag != Tag::FileWrite)
      continue;
    if (auto p = path_argument(ast, id, s))
      f(id, s, *p);
  }
}

bool is_statement(const NormalizedAst &ast, NodeId id) {
  auto p = ast[id].parent;
  return p && ast[*p].kind == NodeKind::ExpressionList;
}

NodeId top_level_statement(const NormalizedAst &ast, NodeId id) {
  while (ast[id].parent && ast[id].parent != ast.root())
    id = *ast[id].parent;
  return id;
}

// Deletes a statement; whole lines when nothing else shares them.
TextEdit removal(const SourceText &src, const Range &r) {
  const std::string &text = src.content();
  std::size_t begin = src.offset_of(r.start);
  std::size_t end = src.offset_of({r.end.line, r.end.col + 1});
  std::size_t line_begin = src.offset_of({r.start.line, 1});
  std::size_t line_end = text.find('\n', end);
  if (line_end == std::string::npos)
    line_end = text.size();
  auto blank = [&](std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i)
      if (text[i] != ' ' && text[i] != '\t' && text[i] != '\r')
        return text[i] == '#' && from == end;
    return true;
  };
  if (blank(line_begin, begin) && blank(end, line_end)) {
    begin = line_begin;
    end = line_end < text.size() ? line_end + 1 : line_end;
  } else {
    std::size_t after = end;
    while (after < line_end && (text[after] == ' ' || text[after] == '\t'))
      ++after;
    if (after < line_end && text[after] == ';') {
      end = after + 1;
      while (end < line_end && (text[end] == ' ' || text[end] == '\t'))
        ++end;
    } else {
      std::size_t before = begin;
      while (before > line_begin && (text[before - 1] == ' ' || text[before - 1] == '\t'))
        --before;
      if (before > line_begin && text[before - 1] == ';')
        begin = before - 1;
    }
  }
  return {src.position_of(begin), src.position_of(end), ""};
}

bool side_effect_free(NodeKind k) {
  return k == NodeKind::Number || k == NodeKind::StringLit || k == NodeKind::Logical ||
         k == NodeKind::Null || k == NodeKind::Symbol;
}

// ---- rules ----

class AbsoluteFilePath : public LintRule {
public:
  std::string id() const override { return "absolute-file-path"; }
  Severity default_severity() const override { return Severity::Warning; }

  void run(const LintContext &ctx, std::vector<Diagnostic> &out) const override {
    const Analysis &a = ctx.analysis;
    const NormalizedAst &ast = a.ast();
    for_each_file_call(a, [&](NodeId call, const Semantics &, NodeId path) {
      const AstNode &lit = ast[path];
      if (lit.kind == NodeKind::StringLit) {
        if (!is_absolute_path(lit.lexeme))
          return;
        Diagnostic d;
        d.range = lit.range;
        d.certainty = Certainty::Exact;
        d.message = "absolute path \"" + lit.lexeme + "\" in " + ast.call_name(call) +
                    "() ties the script to one machine";
        if (auto rel = relative_to_root(a, lit.lexeme)) {
          char quote = ast.text(path).empty() ? '"' : ast.text(path)[0];
          d.fix = QuickFix{"use the project-relative path \"" + *rel + "\"",
                           {{lit.range.start, {lit.range.end.line, lit.range.end.col + 1},
                             r_string(*rel, quote)}}};
        }
        out.push_back(std::move(d));
        return;
      }
      // Computed paths: report when the value is known, but offer no fix.
      auto v = ctx.resolver.value(path).single_string();
      if (v && is_absolute_path(*v)) {
        Diagnostic d;
        d.range = lit.range;
        d.certainty = Certainty::Approximate;
        d.message = "path argument of " + ast.call_name(call) + "() evaluates to the absolute path \"" +
                    *v + "\"";
        out.push_back(std::move(d));
      }
    });
  }

private:
  static std::optional<std::string> relative_to_root(const Analysis &a, const std::string &p) {
    if (!a.options().root || p[0] == '~')
      return std::nullopt;
    fs::path root = fs::path(*a.options().root).lexically_normal();
    fs::path rel = fs::path(p).lexically_normal().lexically_relative(root);
    if (rel.empty() || *rel.begin() == "..")
      return std::nullopt;
    return rel.generic_string();
  }
};

class InvalidFilePath : public LintRule {
public:
  std::string id() const override { return "invalid-file-path"; }
  Severity default_severity() const override { return Severity::Error; }
  bool needs_root() const override { return true; }

  void run(const LintContext &ctx, std::vector<Diagnostic> &out) const override {
    const Analysis &a = ctx.analysis;
    for_each_file_call(a, [&](NodeId, const Semantics &s, NodeId path) {
      const AstNode &lit = a.ast()[path];
      if (s.tag != Tag::FileRead || lit.kind != NodeKind::StringLit || lit.lexeme.empty() ||
          is_absolute_path(lit.lexeme) || a.read_data_file(lit.lexeme))
        return;
      Diagnostic d;
      d.range = lit.range;
      d.certainty = Certainty::Exact;
      d.message = "file \"" + lit.lexeme + "\" does not exist in the project";
      out.push_back(std::move(d));
    });
  }
};

class DfColumnAccess : public LintRule {
public:
  std::string id() const override { return "df-column-access"; }
  Severity default_severity() const override { return Severity::Error; }

  void run(const LintContext &ctx, std::vector<Diagnostic> &out) const override {
    const Analysis &a = ctx.analysis;
    const NormalizedAst &ast = a.ast();
    for (const AstNode &n : ast.nodes()) {
      if (n.kind == NodeKind::Index && (n.lexeme == "$" || n.lexeme == "[[") &&
          n.children.size() == 2 && !assignment_target(ast, n.id)) {
        NodeId field = n.children[1];
        if (n.lexeme == "[[") {
          auto v = ast.argument_value(field);
          if (!v || ast[*v].kind != NodeKind::StringLit)
            continue;
          field = *v;
        }
        check(ctx, n.children[0], {}, field, ast[field].lexeme, out);
      } else if (n.kind == NodeKind::FunctionCall && a.graph().has_vertex(n.id)) {
        const Semantics &s = a.registry().lookup(ast.call_name(n.id));
        if (s.tag == Tag::DfVerb)
          check_verb(ctx, n.id, s.verb, out);
      }
    }
  }

private:
  static bool assignment_target(const NormalizedAst &ast, NodeId id) {
    NodeId child = id;
    for (auto p = ast[id].parent; p; child = *p, p = ast[*p].parent) {
      const AstNode &a = ast[*p];
      if (a.kind == NodeKind::Assignment)
        return a.children[0] == child;
      if (a.kind != NodeKind::Index)
        return false;
    }
    return false;
  }

  static void check(const LintContext &ctx, NodeId frame, const std::set<std::string> &extra,
                    NodeId at, const std::string &column, std::vector<Diagnostic> &out) {
    DataFrameShape shape = ctx.resolver.shape(frame);
    if (shape.open || shape.has_column(column) || extra.count(column))
      return;
    Diagnostic d;
    d.range = ctx.analysis.ast()[at].range;
    d.certainty = Certainty::Exact;
    std::string known;
    for (const auto &c : shape.columns)
      known += (known.empty() ? "" : ", ") + c;
    d.message = "column \"" + column + "\" does not exist; known columns: " +
                (known.empty() ? "none" : known);
    out.push_back(std::move(d));
  }

  static void check_verb(const LintContext &ctx, NodeId call, const std::string &verb,
                         std::vector<Diagnostic> &out) {
    static const std::set<std::string> checked{"mutate",  "filter",    "select",   "arrange",
                                               "group_by", "summarise", "summarize", "rename",
                                               "distinct"};
    if (!checked.count(verb))
      return;
    const NormalizedAst &ast = ctx.analysis.ast();
    auto frame = ctx.resolver.argument(call, 0, ".data");
    if (!frame)
      return;
    bool defines = verb == "mutate" || verb == "summarise" || verb == "summarize";
    std::set<std::string> created;
    for (NodeId a : ast.call_arguments(call)) {
      const AstNode &arg = ast[a];
      if (arg.children.empty() || arg.children[0] == *frame)
        continue;
      for (NodeId sym : free_symbols(ctx, arg.children[0]))
        check(ctx, *frame, created, sym, ast[sym].lexeme, out);
      if (defines && !arg.lexeme.empty())
        created.insert(arg.lexeme);
    }
  }

  // Symbols in an argument that name no variable (data-masked column references).
  static std::vector<NodeId> free_symbols(const LintContext &ctx, NodeId root) {
    const NormalizedAst &ast = ctx.analysis.ast();
    const DataflowGraph &g = ctx.analysis.graph();
    std::vector<NodeId> out;
    std::vector<NodeId> work{root};
    while (!work.empty()) {
      NodeId id = work.back();
      work.pop_back();
      const AstNode &n = ast[id];
      if (n.kind == NodeKind::FunctionDefinition)
        continue;
      if (n.kind == NodeKind::Symbol && g.unresolved_uses().count(id)) {
        auto p = n.parent;
        bool callee = p && ast[*p].kind == NodeKind::FunctionCall && ast[*p].children[0] == id;
        bool field = p && ast[*p].kind == NodeKind::Index && ast[*p].children.size() > 1 &&
                     ast[*p].children[1] == id;
        if (!callee && !field)
          out.push_back(id);
      }
      for (NodeId c : n.children)
        work.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

class SeedRandomness : public LintRule {
public:
  std::string id() const override { return "seed-randomness"; }
  Severity default_severity() const override { return Severity::Warning; }

  void run(const LintContext &ctx, std::vector<Diagnostic> &out) const override {
    const Analysis &a = ctx.analysis;
    const NormalizedAst &ast = a.ast();
    std::vector<NodeId> rng, seeds;
    for (const auto &[id, v] : a.graph().vertices()) {
      if (v.kind != VertexKind::FunctionCall || ast[id].kind != NodeKind::FunctionCall)
        continue;
      if (!v.ns.empty() && v.ns != "base" && v.ns != "stats")
        continue;
      Tag t = a.registry().tag(v.name);
      if (t == Tag::Rng)
        rng.push_back(id);
      else if (t == Tag::Seed)
        seeds.push_back(id);
    }
    bool top_level_seed = std::any_of(seeds.begin(), seeds.end(), [&](NodeId s) {
      return &a.cfg_for(s) == &a.cfg();
    });

    std::vector<std::pair<NodeId, bool>> unseeded; // (call, approximate)
    for (NodeId r : rng) {
      const Cfg &cfg = a.cfg_for(r);
      bool in_function = &cfg != &a.cfg();
      if (seeded(a, r, seeds))
        continue;
      if (in_function && top_level_seed)
        continue;
      unseeded.emplace_back(r, in_function);
    }
    if (unseeded.empty())
      return;

    NodeId first = unseeded.front().first;
    for (auto [r, approx] : unseeded)
      if (ast[top_level_statement(ast, r)].range.start <
          ast[top_level_statement(ast, first)].range.start)
        first = r;
    Position at{ast[top_level_statement(ast, first)].range.start.line, 1};
    std::string line(a.document().source.line(at.line));
    std::string indent = line.substr(0, line.find_first_not_of(" \t"));
    int seed = ctx.settings.value("seed", 42);
    QuickFix fix{"insert set.seed(" + std::to_string(seed) + ")",
                 {{at, at, indent + "set.seed(" + std::to_string(seed) + ")\n"}}};

    for (auto [r, approx] : unseeded) {
      Diagnostic d;
      d.range = ast[r].range;
      d.certainty = approx ? Certainty::Approximate : Certainty::Exact;
      d.message = ast.call_name(r) + "() draws random numbers without a fixed seed";
      d.fix = fix;
      out.push_back(std::move(d));
    }
  }

private:
  static bool seeded(const Analysis &a, NodeId r, const std::vector<NodeId> &seeds) {
    const Cfg &cfg = a.cfg_for(r);
    auto pr = locate(cfg, a.ast(), r);
    if (!pr)
      return false;
    Dominators dom(cfg);
    for (NodeId s : seeds) {
      if (&a.cfg_for(s) != &cfg)
        continue;
      auto ps = locate(cfg, a.ast(), s);
      if (!ps)
        continue;
      if (ps->block == pr->block ? ps->index < pr->index ||
                                       (ps->index == pr->index &&
                                        a.ast()[s].range.end < a.ast()[r].range.start)
                                 : dom.dominates(ps->block, pr->block))
        return true;
    }
    return false;
  }
};

// Assignment definitions nobody reads, split by whether they survive to the end of
// their scope (unused) or are always rebound first (overwritten).
class UnreadDefinition : public LintRule {
public:
  explicit UnreadDefinition(bool overwritten) : overwritten_(overwritten) {}
  std::string id() const override {
    return overwritten_ ? "overwritten-definition" : "unused-definition";
  }
  Severity default_severity() const override { return Severity::Warning; }

  void run(const LintContext &ctx, std::vector<Diagnostic> &out) const override {
    const Analysis &a = ctx.analysis;
    const NormalizedAst &ast = a.ast();
    const DataflowGraph &g = a.graph();
    for (const auto &[def, info] : g.definitions()) {
      if (info.kind != DefinitionKind::Assignment || !g.in_with(def, EdgeLabel::Reads).empty())
        continue;
      if (g.live_at_exit().count(def) == overwritten_)
        continue;
      auto parent = ast[def].parent;
      if (!parent || ast[*parent].kind != NodeKind::Assignment ||
          ast[*parent].children[0] != def)
        continue;
      NodeId assign = *parent;
      // The value of a function body's last assignment is returned.
      if (g.has_vertex(assign) && !g.in_with(assign, EdgeLabel::Returns).empty())
        continue;
      Diagnostic d;
      d.range = ast[assign].range;
      d.certainty = Certainty::Exact;
      d.message = "\"" + ast[def].lexeme + "\" is " +
                  (overwritten_ ? "reassigned before its value is used" : "defined but never used");
      if (is_statement(ast, assign) && side_effect_free(ast[ast[assign].children[1]].kind))
        d.fix = QuickFix{"remove the assignment to " + ast[def].lexeme,
                         {removal(a.document().source, ast[assign].range)}};
      out.push_back(std::move(d));
    }
  }

private:
  bool overwritten_;
};

class DeprecatedFunctions : public LintRule {
public:
  std::string id() const override { return "deprecated-functions"; }
  Severity default_severity() const override { return Severity::Info; }

  void run(const LintContext &ctx, std::vector<Diagnostic> &out) const override {
    std::set<std::string> deprecated{"filter_all",    "filter_at",    "filter_if",
                                     "mutate_all",    "mutate_at",    "mutate_if",
                                     "summarise_all", "summarise_at", "summarise_if"};
    if (ctx.settings.contains("functions"))
      deprecated = ctx.settings["functions"].get<std::set<std::string>>();
    const NormalizedAst &ast = ctx.analysis.ast();
    for (const auto &[id, v] : ctx.analysis.graph().vertices()) {
      if (v.kind != VertexKind::FunctionCall || ast[id].kind != NodeKind::FunctionCall ||
          !deprecated.count(v.name))
        continue;
      Diagnostic d;
      d.range = ast[id].range;
      d.certainty = Certainty::Exact;
      d.message = v.name + "() is deprecated";
      out.push_back(std::move(d));
    }
  }
};

class DeadCode : public LintRule {
public:
  std::string id() const override { return "dead-code"; }
  Severity default_severity() const override { return Severity::Warning; }

  void run(const LintContext &ctx, std::vector<Diagnostic> &out) const override {
    const Analysis &a = ctx.analysis;
    const NormalizedAst &ast = a.ast();
    auto truths = condition_truths(ast, ctx.resolver);
    std::vector<Range> dead;
    std::vector<Position> live;
    auto collect = [&](const Cfg &cfg) {
      SimplifiedCfg s = simplify_cfg(cfg, truths);
      for (const auto &[id, block] : s.dead)
        for (NodeId n : block.nodes)
          dead.push_back(ast[n].range);
      for (const auto &[id, block] : s.cfg.blocks())
        for (NodeId n : block.nodes)
          live.push_back(ast[n].range.start);
    };
    collect(a.cfg());
    for (const auto &[f, cfg] : a.function_cfgs())
      collect(cfg);
    std::sort(dead.begin(), dead.end());
    std::sort(live.begin(), live.end());

    std::vector<Range> merged;
    for (const Range &r : dead) {
      if (!merged.empty()) {
        Range &last = merged.back();
        auto between = std::lower_bound(live.begin(), live.end(), last.end);
        bool live_between = between != live.end() && *between < r.start;
        if (r.start <= last.end || (r.start.line <= last.end.line + 1 && !live_between)) {
          last.end = std::max(last.end, r.end);
          continue;
        }
      }
      merged.push_back(r);
    }
    for (const Range &r : merged) {
      Diagnostic d;
      d.range = r;
      d.certainty = Certainty::Exact;
      d.message = "this code can never run";
      out.push_back(std::move(d));
    }
  }
};

std::set<std::string> ignored_rules(std::string_view line) {
  static const std::regex marker(R"(#\s*lint-ignore:\s*([A-Za-z0-9_,\s-]+))");
  std::set<std::string> out;
  std::string s(line);
  std::smatch m;
  if (!std::regex_search(s, m, marker))
    return out;
  std::string ids = m[1];
  std::string cur;
  for (char c : ids + ",") {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty())
        out.insert(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

} // namespace

Linter Linter::builtin() {
  Linter l;
  l.add(std::make_unique<AbsoluteFilePath>());
  l.add(std::make_unique<InvalidFilePath>());
  l.add(std::make_unique<DfColumnAccess>());
  l.add(std::make_unique<SeedRandomness>());
  l.add(std::make_unique<UnreadDefinition>(false));
  l.add(std::make_unique<DeprecatedFunctions>());
  l.add(std::make_unique<DeadCode>());
  l.add(std::make_unique<UnreadDefinition>(true));
  return l;
}

void Linter::add(std::unique_ptr<LintRule> rule) {
  for (const auto &r : rules_)
    if (r->id() == rule->id())
      throw std::invalid_argument("duplicate lint rule " + rule->id());
  rules_.push_back(std::move(rule));
}

std::vector<std::string> Linter::rule_ids() const {
  std::vector<std::string> out;
  for (const auto &r : rules_)
    out.push_back(r->id());
  return out;
}

LintReport Linter::lint(const Analysis &analysis, const LintConfig &config) const {
  LintReport report;
  auto resolver = analysis.resolver();
  const SourceText &src = analysis.document().source;
  for (const auto &rule : rules_) {
    std::string id = rule->id();
    RuleStatus &status = report.status[id];
    if (!config.enabled(id)) {
      status = {RuleStatus::State::Disabled, "disabled by configuration"};
      continue;
    }
    if (rule->needs_root() && !analysis.options().root) {
      status = {RuleStatus::State::Inactive, "no project root configured"};
      continue;
    }
    const json &settings = config.settings(id);
    Severity severity = rule->default_severity();
    if (settings.contains("severity"))
      severity = parse_severity(settings["severity"].get<std::string>()).value_or(severity);
    std::vector<Diagnostic> found;
    rule->run(LintContext{analysis, settings, *resolver}, found);
    for (Diagnostic &d : found) {
      if (ignored_rules(src.line(d.range.start.line)).count(id))
        continue;
      d.rule = id;
      d.severity = severity;
      report.diagnostics.push_back(std::move(d));
    }
  }
  std::stable_sort(report.diagnostics.begin(), report.diagnostics.end(),
                   [](const Diagnostic &a, const Diagnostic &b) {
                     return std::tie(a.range.start, a.rule) < std::tie(b.range.start, b.rule);
                   });
  return report;
}

SourceText apply_quickfix(const SourceText &source, const QuickFix &fix) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (const TextEdit &e : fix.edits) {
    if (!source.in_bounds(e.start) || !source.in_bounds(e.end))
      throw StaleFixError("quick-fix \"" + fix.title + "\" does not match the current source");
    std::size_t b = source.offset_of(e.start), en = source.offset_of(e.end);
    if (en < b)
      throw StaleFixError("quick-fix \"" + fix.title + "\" has an inverted range");
    spans.emplace_back(b, en);
  }
  std::vector<std::size_t> order(spans.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return spans[x].first > spans[y].first;
  });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (spans[order[i]].second > spans[order[i - 1]].first)
      throw StaleFixError("quick-fix \"" + fix.title + "\" has overlapping edits");
  std::string text = source.content();
  for (std::size_t i : order)
    text.replace(spans[i].first, spans[i].second - spans[i].first, fix.edits[i].text);
  SourceText result(source.origin(), text);
  try {
    parse_normalized(result);
  } catch (const ParseError &e) {
    throw StaleFixError("quick-fix \"" + fix.title + "\" would break the code: " + e.what());
  }
  return result;
}

std::string render_text(const LintReport &report, const Analysis &analysis) {
  std::string out;
  for (const Diagnostic &d : report.diagnostics) {
    Location loc = analysis.locate(d.range);
    out += loc.file + ":" + to_string(loc.range.start) + " [" + std::string(severity_name(d.severity)) +
           "] " + d.rule + ": " + d.message + "\n";
  }
  return out;
}

} // namespace rflow
