#pragma once

#include "rflow/dataflow.hpp"
#include "rflow/reprint.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rflow {

class CriterionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Resolves `$id`, `line:col` or `line@name` to a node id.
NodeId resolve_criterion(const std::string &criterion, const NormalizedAst &ast);

enum class SliceDirection { Backward, Forward, Chop };

std::string_view direction_name(SliceDirection d);

struct SliceResult {
  SliceDirection direction = SliceDirection::Backward;
  std::vector<std::string> criteria;
  NodeSet criterion_ids;
  /// Dependence closure over dataflow vertices, plus the criterion nodes themselves.
  NodeSet included;
  /// Lines printed by `text`.
  std::set<int> lines;
  /// Reconstructed code; enclosing control structures are added here, not in `included`.
  std::string text;
};

/// Slices one analyzed program. Control dependence is derived from the tree once.
class Slicer {
public:
  Slicer(const NormalizedAst &ast, const DataflowGraph &graph, const BuiltInRegistry &registry);

  SliceResult backward(const NodeSet &criteria) const;
  SliceResult forward(const NodeSet &criteria) const;
  /// forward(sources) ∩ backward(sinks).
  SliceResult chop(const NodeSet &sources, const NodeSet &sinks) const;

  SliceResult backward(const std::vector<std::string> &criteria) const;
  SliceResult forward(const std::vector<std::string> &criteria) const;
  SliceResult chop(const std::vector<std::string> &sources,
                   const std::vector<std::string> &sinks) const;

  /// Dataflow vertex standing for a node: itself, else the nearest vertex ancestor,
  /// else every vertex below it.
  NodeSet vertices_for(NodeId node) const;

  /// Vertices whose evaluation decides whether `vertex` runs.
  const std::set<NodeId> &controllers(NodeId vertex) const;

private:
  const NormalizedAst &ast_;
  const DataflowGraph &graph_;
  const BuiltInRegistry &registry_;
  std::map<NodeId, std::set<NodeId>> controllers_;
  std::map<NodeId, std::set<NodeId>> governed_;

  NodeSet closure(const NodeSet &start, bool backward) const;
  SliceResult finish(SliceDirection d, const NodeSet &criteria, NodeSet included) const;
  NodeSet resolve_all(const std::vector<std::string> &criteria) const;
  std::optional<NodeId> value_vertex(NodeId node) const;
};

} // namespace rflow
