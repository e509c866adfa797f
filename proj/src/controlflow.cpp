#include "rflow/controlflow.hpp"

#include <algorithm>
#include <deque>
#include <iterator>
#include <sstream>

namespace rflow {

std::string_view cfg_label_name(CfgLabel l) {
  switch (l) {
  case CfgLabel::Fallthrough: return "fallthrough";
  case CfgLabel::True: return "true";
  case CfgLabel::False: return "false";
  case CfgLabel::LoopBack: return "loop-back";
  }
  return "?";
}

bool operator==(const BasicBlock &a, const BasicBlock &b) {
  return a.id == b.id && a.nodes == b.nodes && a.branch == b.branch;
}

BlockId Cfg::add_block(std::vector<NodeId> nodes, std::optional<NodeId> branch) {
  BlockId id = next_++;
  blocks_[id] = BasicBlock{id, std::move(nodes), branch};
  return id;
}

void Cfg::remove_block(BlockId id) {
  blocks_.erase(id);
  for (auto it = edges_.begin(); it != edges_.end();) {
    if (it->from == id || it->to == id)
      it = edges_.erase(it);
    else
      ++it;
  }
}

std::vector<CfgEdge> Cfg::out_edges(BlockId id) const {
  std::vector<CfgEdge> out;
  for (const CfgEdge &e : edges_)
    if (e.from == id)
      out.push_back(e);
  return out;
}

std::vector<CfgEdge> Cfg::in_edges(BlockId id) const {
  std::vector<CfgEdge> out;
  for (const CfgEdge &e : edges_)
    if (e.to == id)
      out.push_back(e);
  return out;
}

std::set<BlockId> Cfg::unreachable() const {
  std::map<BlockId, std::vector<BlockId>> succ;
  for (const CfgEdge &e : edges_)
    succ[e.from].push_back(e.to);
  std::set<BlockId> seen{entry};
  std::deque<BlockId> work{entry};
  while (!work.empty()) {
    BlockId b = work.front();
    work.pop_front();
    for (BlockId s : succ[b])
      if (seen.insert(s).second)
        work.push_back(s);
  }
  std::set<BlockId> out;
  for (const auto &[id, block] : blocks_)
    if (!seen.count(id))
      out.insert(id);
  return out;
}

std::optional<BlockId> Cfg::block_of(NodeId node) const {
  for (const auto &[id, block] : blocks_)
    for (NodeId n : block.nodes)
      if (n == node)
        return id;
  return std::nullopt;
}

bool Cfg::operator==(const Cfg &o) const {
  return entry == o.entry && exit == o.exit && function == o.function && blocks_ == o.blocks_ &&
         edges_ == o.edges_;
}

namespace {

class CfgBuilder {
public:
  explicit CfgBuilder(const NormalizedAst &ast) : ast_(ast) {}

  Cfg build(NodeId body, std::optional<NodeId> function) {
    cfg_.function = function;
    cfg_.entry = cfg_.add_block();
    pending_ = {{cfg_.entry, CfgLabel::Fallthrough}};
    sequence(body);
    close();
    cfg_.exit = cfg_.add_block();
    connect(cfg_.exit);
    return std::move(cfg_);
  }

private:
  struct Pending {
    BlockId from;
    CfgLabel label;
  };
  struct Loop {
    BlockId head;
    std::vector<Pending> breaks;
  };

  const NormalizedAst &ast_;
  Cfg cfg_;
  std::vector<Pending> pending_;
  std::optional<BlockId> open_;
  std::vector<Loop> loops_;

  void connect(BlockId to) {
    for (const Pending &p : pending_)
      cfg_.add_edge(p.from, to, p.label);
    pending_.clear();
  }

  void close() {
    if (open_) {
      pending_ = {{*open_, CfgLabel::Fallthrough}};
      open_.reset();
    }
  }

  void append(NodeId id) {
    if (!open_) {
      open_ = cfg_.add_block();
      connect(*open_);
    }
    cfg_.block(*open_).nodes.push_back(id);
  }

  BlockId condition_block(NodeId cond, NodeId branch) {
    close();
    BlockId c = cfg_.add_block({cond}, branch);
    connect(c);
    return c;
  }

  // Edges that close a loop body become loop-back edges, except a branch edge that
  // points straight back at its own head.
  void loop_back(BlockId head) {
    for (const Pending &p : pending_) {
      bool branch = p.label == CfgLabel::True || p.label == CfgLabel::False;
      cfg_.add_edge(p.from, head, branch ? p.label : CfgLabel::LoopBack);
    }
    pending_.clear();
  }

  void sequence(NodeId id) {
    const AstNode &n = ast_[id];
    if (n.kind == NodeKind::ExpressionList) {
      for (NodeId c : n.children)
        statement(c);
    } else {
      statement(id);
    }
  }

  void statement(NodeId id) {
    const AstNode &n = ast_[id];
    switch (n.kind) {
    case NodeKind::ExpressionList: sequence(id); break;
    case NodeKind::If: {
      BlockId c = condition_block(n.children[0], id);
      pending_ = {{c, CfgLabel::True}};
      sequence(n.children[1]);
      close();
      std::vector<Pending> then_out = std::move(pending_);
      pending_ = {{c, CfgLabel::False}};
      if (n.children.size() > 2) {
        sequence(n.children[2]);
        close();
      }
      pending_.insert(pending_.end(), then_out.begin(), then_out.end());
      break;
    }
    case NodeKind::While: loop(id, n.children[0], n.children[1]); break;
    case NodeKind::For:
      append(n.children[1]);
      loop(id, id, n.children[2]);
      break;
    case NodeKind::Repeat: {
      close();
      BlockId head = cfg_.add_block({id});
      connect(head);
      open_ = head;
      loops_.push_back({head, {}});
      sequence(n.children[0]);
      close();
      loop_back(head);
      pending_ = std::move(loops_.back().breaks);
      loops_.pop_back();
      break;
    }
    case NodeKind::Break:
    case NodeKind::Next: {
      append(id);
      close();
      if (!loops_.empty()) {
        if (n.kind == NodeKind::Break) {
          auto &breaks = loops_.back().breaks;
          breaks.insert(breaks.end(), pending_.begin(), pending_.end());
          pending_.clear();
        } else {
          loop_back(loops_.back().head);
        }
      }
      break;
    }
    default: append(id); break;
    }
  }

  void loop(NodeId id, NodeId cond, NodeId body) {
    BlockId head = condition_block(cond, id);
    loops_.push_back({head, {}});
    pending_ = {{head, CfgLabel::True}};
    sequence(body);
    close();
    loop_back(head);
    pending_ = {{head, CfgLabel::False}};
    auto &breaks = loops_.back().breaks;
    pending_.insert(pending_.end(), breaks.begin(), breaks.end());
    loops_.pop_back();
  }
};

} // namespace

Cfg build_cfg(const NormalizedAst &ast) { return CfgBuilder(ast).build(ast.root(), std::nullopt); }

Cfg build_cfg(const NormalizedAst &ast, NodeId function_definition) {
  const AstNode &f = ast[function_definition];
  if (f.kind != NodeKind::FunctionDefinition)
    throw std::invalid_argument("node " + std::to_string(function_definition) +
                                " is not a function definition");
  return CfgBuilder(ast).build(f.children.back(), function_definition);
}

std::map<NodeId, Cfg> build_function_cfgs(const NormalizedAst &ast) {
  std::map<NodeId, Cfg> out;
  for (const AstNode &n : ast.nodes())
    if (n.kind == NodeKind::FunctionDefinition)
      out.emplace(n.id, build_cfg(ast, n.id));
  return out;
}

SimplifiedCfg simplify_cfg(const Cfg &cfg, const std::map<NodeId, Truth> &conditions) {
  SimplifiedCfg out{cfg, {}};
  for (const auto &[id, block] : cfg.blocks()) {
    if (!block.branch || block.nodes.empty())
      continue;
    auto it = conditions.find(block.nodes.front());
    if (it == conditions.end() || it->second == Truth::Unknown)
      continue;
    CfgLabel never = it->second == Truth::AlwaysFalse ? CfgLabel::True : CfgLabel::False;
    for (const CfgEdge &e : cfg.out_edges(id))
      if (e.label == never)
        out.cfg.remove_edge(e);
  }
  for (BlockId b : out.cfg.unreachable()) {
    if (b == cfg.exit)
      continue;
    out.dead.emplace(b, out.cfg.block(b));
    out.cfg.remove_block(b);
  }
  return out;
}

std::string render_mermaid(const Cfg &cfg, const NormalizedAst &ast,
                           const std::map<BlockId, BasicBlock> &dead) {
  auto label = [&](const BasicBlock &b) {
    if (b.id == cfg.entry)
      return std::string("entry");
    if (b.id == cfg.exit)
      return std::string("exit");
    std::string s;
    for (NodeId n : b.nodes) {
      if (!s.empty())
        s += "<br/>";
      const AstNode &node = ast[n];
      std::string text = node.kind == NodeKind::For ? "for " + ast[node.children[0]].lexeme
                                                    : ast.text(n);
      for (char c : text)
        s += c == '"' ? std::string("#quot;") : c == '\n' ? std::string(" ") : std::string(1, c);
    }
    return s;
  };
  auto shape = [&](const BasicBlock &b) {
    std::string text = "\"" + label(b) + "\"";
    if (b.id == cfg.entry || b.id == cfg.exit)
      return "((" + text + "))";
    if (b.branch)
      return "{{" + text + "}}";
    return "[" + text + "]";
  };
  std::ostringstream out;
  out << "flowchart TD\n";
  for (const auto &[id, b] : cfg.blocks())
    out << "    b" << id << shape(b) << '\n';
  for (const auto &[id, b] : dead)
    out << "    b" << id << shape(b) << ":::dead\n";
  for (const CfgEdge &e : cfg.edges()) {
    out << "    b" << e.from;
    switch (e.label) {
    case CfgLabel::True: out << " -->|\"⊤\"| "; break;
    case CfgLabel::False: out << " -->|\"⊥\"| "; break;
    case CfgLabel::LoopBack: out << " -.-> "; break;
    case CfgLabel::Fallthrough: out << " --> "; break;
    }
    out << 'b' << e.to << '\n';
  }
  if (!dead.empty())
    out << "    classDef dead stroke-dasharray: 5 5,opacity:0.5\n";
  return out.str();
}

Dominators::Dominators(const Cfg &cfg) {
  std::set<BlockId> all;
  for (const auto &[id, b] : cfg.blocks())
    all.insert(id);
  std::set<BlockId> unreachable = cfg.unreachable();
  for (BlockId id : all)
    dom_[id] = id == cfg.entry ? std::set<BlockId>{id} : all;
  for (bool changed = true; changed;) {
    changed = false;
    for (BlockId id : all) {
      if (id == cfg.entry || unreachable.count(id))
        continue;
      std::set<BlockId> next;
      bool first = true;
      for (const CfgEdge &e : cfg.in_edges(id)) {
        if (unreachable.count(e.from))
          continue;
        if (first) {
          next = dom_[e.from];
          first = false;
        } else {
          std::set<BlockId> keep;
          std::set_intersection(next.begin(), next.end(), dom_[e.from].begin(),
                                dom_[e.from].end(), std::inserter(keep, keep.end()));
          next = std::move(keep);
        }
      }
      next.insert(id);
      if (next != dom_[id]) {
        dom_[id] = std::move(next);
        changed = true;
      }
    }
  }
}

bool Dominators::dominates(BlockId a, BlockId b) const {
  auto it = dom_.find(b);
  return it != dom_.end() && it->second.count(a);
}

const std::set<BlockId> &Dominators::of(BlockId b) const { return dom_.at(b); }

std::optional<CfgPoint> locate(const Cfg &cfg, const NormalizedAst &ast, NodeId node) {
  for (std::optional<NodeId> n = node; n; n = ast[*n].parent) {
    if (auto b = cfg.block_of(*n)) {
      const auto &nodes = cfg.block(*b).nodes;
      auto pos = std::find(nodes.begin(), nodes.end(), *n) - nodes.begin();
      return CfgPoint{*b, static_cast<std::size_t>(pos)};
    }
    if (ast[*n].kind == NodeKind::FunctionDefinition && cfg.function != *n)
      return std::nullopt;
  }
  return std::nullopt;
}

} // namespace rflow
