#pragma once

#include "rflow/ast.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace rflow {

using BlockId = std::uint32_t;

enum class CfgLabel { Fallthrough, True, False, LoopBack };

std::string_view cfg_label_name(CfgLabel l);

struct BasicBlock {
  BlockId id = 0;
  /// Statements in execution order; a condition block holds its condition expression
  /// (or the `for` node for the has-next test).
  std::vector<NodeId> nodes;
  /// The If/While/For node this block decides, for condition blocks.
  std::optional<NodeId> branch;
};

struct CfgEdge {
  BlockId from = 0;
  BlockId to = 0;
  CfgLabel label = CfgLabel::Fallthrough;

  auto operator<=>(const CfgEdge &) const = default;
};

class Cfg {
public:
  BlockId add_block(std::vector<NodeId> nodes = {}, std::optional<NodeId> branch = {});
  void add_edge(BlockId from, BlockId to, CfgLabel label) { edges_.insert({from, to, label}); }
  void remove_edge(const CfgEdge &e) { edges_.erase(e); }
  void remove_block(BlockId id);

  const std::map<BlockId, BasicBlock> &blocks() const { return blocks_; }
  BasicBlock &block(BlockId id) { return blocks_.at(id); }
  const BasicBlock &block(BlockId id) const { return blocks_.at(id); }
  const std::set<CfgEdge> &edges() const { return edges_; }
  std::vector<CfgEdge> out_edges(BlockId id) const;
  std::vector<CfgEdge> in_edges(BlockId id) const;

  BlockId entry = 0;
  BlockId exit = 0;
  /// FunctionDefinition whose body this graph describes, or nullopt for the top level.
  std::optional<NodeId> function;

  /// Blocks not reachable from entry.
  std::set<BlockId> unreachable() const;
  /// Block holding a statement or condition node, if any.
  std::optional<BlockId> block_of(NodeId node) const;

  bool operator==(const Cfg &) const;

private:
  std::map<BlockId, BasicBlock> blocks_;
  std::set<CfgEdge> edges_;
  BlockId next_ = 0;
};

bool operator==(const BasicBlock &a, const BasicBlock &b);

/// CFG of the top-level code (function bodies are opaque statements).
Cfg build_cfg(const NormalizedAst &ast);
/// CFG of one function body.
Cfg build_cfg(const NormalizedAst &ast, NodeId function_definition);
/// Every function body in the program, keyed by FunctionDefinition id.
std::map<NodeId, Cfg> build_function_cfgs(const NormalizedAst &ast);

/// Block dominance over one Cfg (iterative data-flow formulation).
class Dominators {
public:
  explicit Dominators(const Cfg &cfg);
  /// Whether every path from entry to `b` passes through `a` (reflexive).
  bool dominates(BlockId a, BlockId b) const;
  const std::set<BlockId> &of(BlockId b) const;

private:
  std::map<BlockId, std::set<BlockId>> dom_;
};

/// Where a node executes: its block and the index of the enclosing statement in it.
struct CfgPoint {
  BlockId block = 0;
  std::size_t index = 0;
};

/// Locates `node` (or its nearest enclosing statement) in `cfg`.
std::optional<CfgPoint> locate(const Cfg &cfg, const NormalizedAst &ast, NodeId node);

/// What is statically known about a condition.
enum class Truth { Unknown, AlwaysTrue, AlwaysFalse };

struct SimplifiedCfg {
  Cfg cfg;
  /// Removed blocks with their contents.
  std::map<BlockId, BasicBlock> dead;
};

/// Drops branch edges that a constant condition can never take, then every block no
/// longer reachable from entry. `conditions` is keyed by condition node id.
SimplifiedCfg simplify_cfg(const Cfg &cfg, const std::map<NodeId, Truth> &conditions);

/// mermaid-compatible `flowchart TD` text; `dead` blocks are listed with class `dead`.
std::string render_mermaid(const Cfg &cfg, const NormalizedAst &ast,
                           const std::map<BlockId, BasicBlock> &dead = {});

} // namespace rflow
