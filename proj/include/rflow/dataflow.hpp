#pragma once

#include "rflow/ast.hpp"
#include "rflow/registry.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rflow {

enum class VertexKind { Value, Use, VariableDefinition, FunctionDefinition, FunctionCall };

std::string_view vertex_kind_name(VertexKind k);

enum class EdgeLabel : std::uint8_t {
  Reads = 1 << 0,
  Returns = 1 << 1,
  DefinedBy = 1 << 2,
  DefinedByOnCall = 1 << 3,
  Calls = 1 << 4,
  Argument = 1 << 5,
};

/// Bit set of EdgeLabel values.
class EdgeLabels {
public:
  constexpr EdgeLabels() = default;
  constexpr EdgeLabels(EdgeLabel l) : bits_(static_cast<std::uint8_t>(l)) {}

  constexpr EdgeLabels operator|(EdgeLabels o) const { return from_bits(bits_ | o.bits_); }
  constexpr bool has(EdgeLabel l) const { return bits_ & static_cast<std::uint8_t>(l); }
  constexpr bool intersects(EdgeLabels o) const { return bits_ & o.bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool operator==(const EdgeLabels &) const = default;

  static constexpr EdgeLabels from_bits(std::uint8_t b) {
    EdgeLabels l;
    l.bits_ = b;
    return l;
  }
  static constexpr EdgeLabels all() { return from_bits(0x3F); }

  /// Labels in render order: reads, returns, defined-by, defined-by-on-call, calls, argument.
  std::vector<std::string_view> names() const;

private:
  std::uint8_t bits_ = 0;
};

constexpr EdgeLabels operator|(EdgeLabel a, EdgeLabel b) { return EdgeLabels(a) | EdgeLabels(b); }

struct Vertex {
  NodeId id = 0;
  VertexKind kind = VertexKind::Value;
  std::string name;
  std::string ns; // package of a namespaced call
  Range range;
};

enum class DefinitionKind { Assignment, SuperAssignment, Parameter, LoopVariable, PartialUpdate };

/// How a VariableDefinition got its value.
struct DefinitionInfo {
  DefinitionKind kind = DefinitionKind::Assignment;
  /// Vertex of the assigned value (RHS, default value, or loop sequence).
  std::optional<NodeId> value;
  /// Scope that owns the binding: the enclosing FunctionDefinition, or nullopt for global.
  std::optional<NodeId> scope;
};

struct FunctionInfo {
  std::vector<NodeId> parameters; // Parameter ids, in order
  std::set<NodeId> results;       // vertices whose value the function may return
};

class DataflowGraph {
public:
  void add_vertex(Vertex v);
  /// Merges labels into the (from, to) edge. Returns true when something changed.
  bool add_edge(NodeId from, NodeId to, EdgeLabels labels);

  bool has_vertex(NodeId id) const { return vertices_.count(id) > 0; }
  const Vertex &vertex(NodeId id) const { return vertices_.at(id); }
  const std::map<NodeId, Vertex> &vertices() const { return vertices_; }
  const std::map<std::pair<NodeId, NodeId>, EdgeLabels> &edges() const { return edges_; }
  EdgeLabels edge(NodeId from, NodeId to) const;

  const std::set<NodeId> &successors(NodeId id) const;
  const std::set<NodeId> &predecessors(NodeId id) const;
  /// Targets of outgoing edges carrying `label`.
  std::vector<NodeId> out_with(NodeId id, EdgeLabel label) const;
  std::vector<NodeId> in_with(NodeId id, EdgeLabel label) const;

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  /// Increases on every structural change; used to detect loop fixpoints.
  std::uint64_t revision() const { return revision_; }

  const std::set<NodeId> &unresolved_calls() const { return unresolved_calls_; }
  const std::set<NodeId> &unresolved_uses() const { return unresolved_uses_; }
  const std::map<NodeId, DefinitionInfo> &definitions() const { return definitions_; }
  const std::map<NodeId, FunctionInfo> &functions() const { return functions_; }
  /// Definitions still bound when their scope finishes (global exit or function end).
  const std::set<NodeId> &live_at_exit() const { return live_at_exit_; }

  // Mutators used by the builder.
  void set_definition(NodeId def, DefinitionInfo info) { definitions_[def] = info; }
  FunctionInfo &function(NodeId fdef) { return functions_[fdef]; }
  void mark_live_at_exit(NodeId def) { live_at_exit_.insert(def); }
  void set_unresolved(std::set<NodeId> calls, std::set<NodeId> uses) {
    unresolved_calls_ = std::move(calls);
    unresolved_uses_ = std::move(uses);
  }

private:
  std::map<NodeId, Vertex> vertices_;
  std::map<std::pair<NodeId, NodeId>, EdgeLabels> edges_;
  std::map<NodeId, std::set<NodeId>> out_;
  std::map<NodeId, std::set<NodeId>> in_;
  std::set<NodeId> unresolved_calls_;
  std::set<NodeId> unresolved_uses_;
  std::map<NodeId, DefinitionInfo> definitions_;
  std::map<NodeId, FunctionInfo> functions_;
  std::set<NodeId> live_at_exit_;
  std::uint64_t revision_ = 0;
};

/// Lexical scope chain. Frame 0 is the innermost; the last frame is global.
class Environment {
public:
  using Frame = std::map<std::string, std::set<NodeId>>;

  Environment() : frames_(1) {}

  /// Innermost non-empty binding, with the index of the frame it came from.
  std::pair<std::set<NodeId>, std::size_t> lookup_with_depth(const std::string &name) const;
  std::set<NodeId> lookup(const std::string &name) const { return lookup_with_depth(name).first; }

  /// Strong update of the innermost frame; returns the definitions it replaced.
  std::set<NodeId> assign(const std::string &name, NodeId def);
  /// `<<-`: nearest enclosing frame (skipping the innermost) that binds name, else global.
  std::set<NodeId> super_assign(const std::string &name, NodeId def);

  void push_frame() { frames_.insert(frames_.begin(), Frame{}); }
  std::size_t depth() const { return frames_.size(); }
  const std::vector<Frame> &frames() const { return frames_; }
  const Frame &global() const { return frames_.back(); }

  /// Union of bindings, frame by frame; both chains must have the same depth.
  static Environment merge(const Environment &a, const Environment &b);
  bool operator==(const Environment &) const = default;

private:
  std::vector<Frame> frames_;
};

struct DataflowOptions {
  /// Loads the text of a `source("...")` target given the literal path. Returning nullopt
  /// treats the call as unknown.
  std::function<std::optional<SourceText>(const std::string &)> load_source;
};

struct DataflowResult {
  DataflowGraph graph;
  Environment exit_env;
  /// Names bound by inlined `source()` calls, per call.
  std::map<NodeId, std::set<std::string>> sourced;
};

DataflowResult build_dataflow(const NormalizedAst &ast, const BuiltInRegistry &registry,
                              const DataflowOptions &options = {});

/// FunctionDefinition vertices a call may invoke. Throws std::invalid_argument for
/// ids that are not FunctionCall vertices.
std::set<NodeId> resolve_call_targets(const DataflowGraph &graph, NodeId call);

/// Vertex listing followed by one `FROM -> TO: LABELS` line per edge, sorted by
/// (from, to), and an `unresolved:` footer for uses without a reaching definition.
std::string render_ascii(const DataflowGraph &graph);

/// mermaid-compatible `flowchart TD` text.
std::string render_mermaid(const DataflowGraph &graph);

} // namespace rflow
