#pragma once

#include "rflow/source.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rflow {

using NodeId = std::uint32_t;

enum class NodeKind {
  Number,
  StringLit,
  Logical,
  Null,
  Symbol,
  Parameter,
  Argument,
  FunctionCall,
  FunctionDefinition,
  BinaryOp,
  UnaryOp,
  Assignment,
  If,
  For,
  While,
  Repeat,
  Break,
  Next,
  ExpressionList,
  Index,
  Namespace,
  // Only present in the concrete tree; removed by normalize().
  Pipe,
  RightAssignment,
  Paren,
};

std::string_view kind_name(NodeKind k);

/// Concrete syntax tree produced by parse(). Owns its children.
struct SyntaxNode {
  NodeKind kind = NodeKind::ExpressionList;
  std::string lexeme;
  Range range;
  std::vector<SyntaxNode> children;
};

struct Comment {
  int line = 0;
  std::string text; // including the leading '#'
};

struct SyntaxTree {
  SourcePtr source;
  SyntaxNode root;
  std::vector<Comment> comments;
};

class ParseError : public std::runtime_error {
public:
  ParseError(std::string message, Position where, std::string expected)
      : std::runtime_error(to_string(where) + ": " + message), message_(std::move(message)),
        where_(where), expected_(std::move(expected)) {}

  const std::string &message() const { return message_; }
  Position where() const { return where_; }
  const std::string &expected() const { return expected_; }

private:
  std::string message_;
  Position where_;
  std::string expected_;
};

/// One node of the normalized tree. Layout of `children` by kind:
///   Assignment          [target, value]            lexeme = operator (`<-`, `<<-`, `=`)
///   BinaryOp            [lhs, rhs]                 lexeme = operator
///   UnaryOp             [operand]                  lexeme = operator
///   FunctionCall        [callee, Argument...]      lexeme = callee name or ""
///   Argument            [value] or []              lexeme = argument name or ""
///   FunctionDefinition  [Parameter..., body]
///   Parameter           [default] or []            lexeme = parameter name
///   If                  [cond, then, else?]
///   For                 [Symbol var, seq, body]
///   While               [cond, body]
///   Repeat              [body]
///   Index               [object, Argument...]      lexeme `[` / `[[`; for `$`/`@`: [object, field]
///   Namespace           [Symbol pkg, Symbol name]  lexeme `::` / `:::`
///   ExpressionList      statements                 lexeme `{` when braced, "" for the root
struct AstNode {
  NodeId id = 0;
  NodeKind kind = NodeKind::ExpressionList;
  std::string lexeme;
  Range range;
  std::vector<NodeId> children;
  std::optional<NodeId> parent;
};

/// Desugared tree with post-order ids. Nodes are stored by id.
class NormalizedAst {
public:
  NormalizedAst() = default;
  NormalizedAst(SourcePtr source, std::vector<AstNode> nodes, std::vector<Comment> comments);

  const SourceText &source() const { return *source_; }
  const SourcePtr &source_ptr() const { return source_; }
  const std::vector<Comment> &comments() const { return comments_; }

  std::size_t size() const { return nodes_.size(); }
  bool contains(NodeId id) const { return id < nodes_.size(); }
  const AstNode &node(NodeId id) const { return nodes_.at(id); }
  const AstNode &operator[](NodeId id) const { return nodes_.at(id); }
  NodeId root() const { return static_cast<NodeId>(nodes_.size() - 1); }
  const std::vector<AstNode> &nodes() const { return nodes_; }

  /// Callee name for FunctionCall nodes: symbol text, or `name` part of `pkg::name`.
  std::string call_name(NodeId call) const;
  /// Package of a namespaced callee (`pkg` of `pkg::f`), empty otherwise.
  std::string call_namespace(NodeId call) const;
  /// Value node of an Argument, if any.
  std::optional<NodeId> argument_value(NodeId arg) const;
  /// Arguments of a FunctionCall (children after the callee).
  std::vector<NodeId> call_arguments(NodeId call) const;

  bool is_ancestor(NodeId ancestor, NodeId node) const;

  /// Source text of a node.
  std::string text(NodeId id) const { return source_->text(node(id).range); }

private:
  SourcePtr source_;
  std::vector<AstNode> nodes_;
  std::vector<Comment> comments_;
};

SyntaxTree parse(const SourceText &source);
SyntaxTree parse(SourcePtr source);
NormalizedAst normalize(const SyntaxTree &tree);
inline NormalizedAst parse_normalized(const SourceText &source) { return normalize(parse(source)); }

/// Indented dump of the normalized tree, one node per line: `id kind lexeme @range`.
std::string dump(const NormalizedAst &ast);
/// Same layout for the concrete tree, without ids.
std::string dump(const SyntaxTree &tree);

} // namespace rflow
