#include "rflow/reprint.hpp"

#include <stdexcept>

namespace rflow {

namespace {

bool is_structural(const AstNode &n) {
  switch (n.kind) {
  case NodeKind::If:
  case NodeKind::For:
  case NodeKind::While:
  case NodeKind::Repeat:
  case NodeKind::FunctionDefinition: return true;
  case NodeKind::ExpressionList: return n.lexeme == "{";
  default: return false;
  }
}

void add_frame(const NormalizedAst &ast, const AstNode &n, std::set<int> &lines) {
  if (n.kind == NodeKind::ExpressionList && n.lexeme.empty())
    return;
  lines.insert(n.range.start.line);
  lines.insert(n.range.end.line);
  if (n.kind == NodeKind::If && n.children.size() == 3) {
    // `} else {` may sit on its own line between the branches.
    lines.insert(ast[n.children[1]].range.end.line);
    lines.insert(ast[n.children[2]].range.start.line);
  }
  if (n.kind == NodeKind::FunctionDefinition || n.kind == NodeKind::While ||
      n.kind == NodeKind::For || n.kind == NodeKind::Repeat) {
    lines.insert(ast[n.children.back()].range.start.line);
  }
}

// Lines of a kept non-structural node: its whole range, except the interiors of
// structural descendants, which only contribute their frames.
void add_whole(const NormalizedAst &ast, const AstNode &n, std::set<int> &lines) {
  if (is_structural(n)) {
    add_frame(ast, n, lines);
    return;
  }
  if (n.children.empty()) {
    for (int l = n.range.start.line; l <= n.range.end.line; ++l)
      lines.insert(l);
    return;
  }
  // Lines covered by no child belong to this node (operators, call parentheses).
  std::set<int> child_lines;
  for (NodeId c : n.children) {
    const AstNode &child = ast[c];
    for (int l = child.range.start.line; l <= child.range.end.line; ++l)
      child_lines.insert(l);
    add_whole(ast, child, lines);
  }
  for (int l = n.range.start.line; l <= n.range.end.line; ++l)
    if (!child_lines.count(l))
      lines.insert(l);
  lines.insert(n.range.start.line);
  lines.insert(n.range.end.line);
}

} // namespace

std::set<int> reprint_lines(const NormalizedAst &ast, const NodeSet &keep) {
  std::set<int> lines;
  for (NodeId id : keep) {
    if (!ast.contains(id))
      throw std::out_of_range("node id " + std::to_string(id) + " is not part of the tree");
    const AstNode &n = ast[id];
    if (n.kind == NodeKind::ExpressionList && n.lexeme.empty())
      continue;
    add_whole(ast, n, lines);
    for (auto p = n.parent; p; p = ast[*p].parent) {
      const AstNode &anc = ast[*p];
      if (anc.kind == NodeKind::ExpressionList && anc.lexeme.empty())
        break;
      if (is_structural(anc)) {
        add_frame(ast, anc, lines);
      } else {
        lines.insert(anc.range.start.line);
        lines.insert(anc.range.end.line);
      }
    }
  }
  return lines;
}

std::string reprint(const NormalizedAst &ast, const NodeSet &keep) {
  std::string out;
  for (int l : reprint_lines(ast, keep)) {
    std::string_view text = ast.source().line(l);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t'))
      text.remove_suffix(1);
    out.append(text);
    out.push_back('\n');
  }
  return out;
}

} // namespace rflow
