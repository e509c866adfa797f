#include "rflow/controlflow.hpp"
#include "support/generator.hpp"
#include "support/interpreter.hpp"

#include <gtest/gtest.h>

using namespace rflow;

namespace {

NormalizedAst norm(const std::string &code) { return parse_normalized(SourceText("<test>", code)); }

std::vector<std::string> block_texts(const Cfg &cfg, const NormalizedAst &ast, BlockId b) {
  std::vector<std::string> out;
  for (NodeId n : cfg.block(b).nodes)
    out.push_back(ast.text(n));
  return out;
}

std::optional<BlockId> find_block(const Cfg &cfg, const NormalizedAst &ast,
                                  const std::string &first) {
  for (const auto &[id, b] : cfg.blocks())
    if (!b.nodes.empty() && ast.text(b.nodes.front()) == first)
      return id;
  return std::nullopt;
}

bool has_edge(const Cfg &cfg, BlockId from, BlockId to, CfgLabel label) {
  return cfg.edges().count({from, to, label}) > 0;
}

Truth literal_truth(const AstNode &n) {
  if (n.kind == NodeKind::Logical && n.lexeme == "TRUE")
    return Truth::AlwaysTrue;
  if (n.kind == NodeKind::Logical && n.lexeme == "FALSE")
    return Truth::AlwaysFalse;
  return Truth::Unknown;
}

std::map<NodeId, Truth> literal_conditions(const NormalizedAst &ast) {
  std::map<NodeId, Truth> out;
  for (const auto &n : ast.nodes())
    if (n.kind == NodeKind::If || n.kind == NodeKind::While)
      out[n.children[0]] = literal_truth(ast[n.children[0]]);
  return out;
}

} // namespace

TEST(Cfg, WhileLoopIsFiveBlocks) {
  auto ast = norm("x <- 0\nwhile(x < 20) {\n   x <- x + 1\n}\n");
  Cfg cfg = build_cfg(ast);
  ASSERT_EQ(cfg.blocks().size(), 5u);
  auto init = find_block(cfg, ast, "x <- 0");
  auto cond = find_block(cfg, ast, "x < 20");
  auto body = find_block(cfg, ast, "x <- x + 1");
  ASSERT_TRUE(init && cond && body);
  EXPECT_EQ(cfg.edges().size(), 5u);
  EXPECT_TRUE(has_edge(cfg, cfg.entry, *init, CfgLabel::Fallthrough));
  EXPECT_TRUE(has_edge(cfg, *init, *cond, CfgLabel::Fallthrough));
  EXPECT_TRUE(has_edge(cfg, *cond, *body, CfgLabel::True));
  EXPECT_TRUE(has_edge(cfg, *body, *cond, CfgLabel::LoopBack));
  EXPECT_TRUE(has_edge(cfg, *cond, cfg.exit, CfgLabel::False));
  EXPECT_TRUE(cfg.in_edges(cfg.entry).empty());
  EXPECT_TRUE(cfg.out_edges(cfg.exit).empty());
}

TEST(Cfg, StraightLineCoalesces) {
  auto ast = norm("a <- 1\nb <- 2");
  Cfg cfg = build_cfg(ast);
  ASSERT_EQ(cfg.blocks().size(), 3u);
  auto b = find_block(cfg, ast, "a <- 1");
  ASSERT_TRUE(b);
  EXPECT_EQ(block_texts(cfg, ast, *b), (std::vector<std::string>{"a <- 1", "b <- 2"}));
}

TEST(Cfg, IfElseFormsDiamond) {
  auto ast = norm("if (c) a else b\nz");
  Cfg cfg = build_cfg(ast);
  auto cond = find_block(cfg, ast, "c");
  auto then_b = find_block(cfg, ast, "a");
  auto else_b = find_block(cfg, ast, "b");
  auto join = find_block(cfg, ast, "z");
  ASSERT_TRUE(cond && then_b && else_b && join);
  EXPECT_TRUE(has_edge(cfg, *cond, *then_b, CfgLabel::True));
  EXPECT_TRUE(has_edge(cfg, *cond, *else_b, CfgLabel::False));
  EXPECT_TRUE(has_edge(cfg, *then_b, *join, CfgLabel::Fallthrough));
  EXPECT_TRUE(has_edge(cfg, *else_b, *join, CfgLabel::Fallthrough));
}

TEST(Cfg, ConditionBlocksHaveOneTrueAndOneFalseSuccessor) {
  auto ast = norm("for (i in 1:3) { if (i > 1) next; if (i > 2) break }\nrepeat { break }\n"
                  "while (x) {}\nif (y) {}");
  Cfg cfg = build_cfg(ast);
  for (const auto &[id, b] : cfg.blocks()) {
    if (!b.branch)
      continue;
    int t = 0, f = 0;
    for (const auto &e : cfg.out_edges(id)) {
      t += e.label == CfgLabel::True;
      f += e.label == CfgLabel::False;
    }
    EXPECT_EQ(t, 1) << "block " << id;
    EXPECT_EQ(f, 1) << "block " << id;
  }
  EXPECT_TRUE(cfg.unreachable().empty());
}

TEST(Cfg, BreakExitsAndNextLoopsBack) {
  auto ast = norm("while (a) {\n  if (b) break\n  if (c) next\n  d\n}\ne");
  Cfg cfg = build_cfg(ast);
  auto head = find_block(cfg, ast, "a");
  auto brk = find_block(cfg, ast, "break");
  auto nxt = find_block(cfg, ast, "next");
  auto after = find_block(cfg, ast, "e");
  ASSERT_TRUE(head && brk && nxt && after);
  EXPECT_TRUE(has_edge(cfg, *brk, *after, CfgLabel::Fallthrough));
  EXPECT_TRUE(has_edge(cfg, *nxt, *head, CfgLabel::LoopBack));
  EXPECT_TRUE(has_edge(cfg, *head, *after, CfgLabel::False));
}

TEST(Cfg, ForUsesHasNextBlock) {
  auto ast = norm("s <- 0\nfor (i in 1:10) s <- s + i");
  Cfg cfg = build_cfg(ast);
  auto pre = find_block(cfg, ast, "s <- 0");
  ASSERT_TRUE(pre);
  EXPECT_EQ(block_texts(cfg, ast, *pre).back(), "1:10");
  NodeId for_id = ast[ast.root()].children[1];
  auto head = cfg.block_of(for_id);
  ASSERT_TRUE(head);
  EXPECT_EQ(cfg.block(*head).branch, for_id);
  EXPECT_TRUE(has_edge(cfg, *head, cfg.exit, CfgLabel::False));
}

TEST(Cfg, FunctionBodiesGetTheirOwnGraph) {
  auto ast = norm("f <- function(n) {\n  if (n > 0) 1 else 2\n}\nf(1)");
  Cfg top = build_cfg(ast);
  EXPECT_EQ(top.blocks().size(), 3u);
  auto fns = build_function_cfgs(ast);
  ASSERT_EQ(fns.size(), 1u);
  const Cfg &body = fns.begin()->second;
  EXPECT_EQ(body.function, fns.begin()->first);
  EXPECT_TRUE(find_block(body, ast, "n > 0"));
  EXPECT_THROW(build_cfg(ast, 0), std::invalid_argument);
}

TEST(Cfg, ExecutionPathsAreCfgPaths) {
  std::mt19937 rng(5);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    auto ast = norm(oracle::generate_program(rng, {}));
    oracle::RunResult run;
    try {
      run = oracle::run(ast, 100000);
    } catch (const oracle::EvalError &) {
      continue;
    }
    Cfg cfg = build_cfg(ast);
    std::set<NodeId> statements;
    for (const auto &[id, b] : cfg.blocks())
      statements.insert(b.nodes.begin(), b.nodes.end());
    std::set<NodeId> executed;
    for (const auto &[id, v] : run.values)
      if (statements.count(id))
        executed.insert(id);

    std::set<NodeId> walked;
    BlockId cur = cfg.entry;
    for (int steps = 0; cur != cfg.exit; ++steps) {
      ASSERT_LT(steps, 10000);
      const BasicBlock &b = cfg.block(cur);
      for (NodeId n : b.nodes) {
        ASSERT_TRUE(run.values.count(n)) << "block " << cur << " not executed";
        walked.insert(n);
      }
      auto out = cfg.out_edges(cur);
      ASSERT_FALSE(out.empty());
      if (b.branch) {
        bool taken = std::get<bool>(run.values.at(b.nodes.front()).data);
        CfgLabel want = taken ? CfgLabel::True : CfgLabel::False;
        auto it = std::find_if(out.begin(), out.end(), [&](auto &e) { return e.label == want; });
        ASSERT_NE(it, out.end());
        cur = it->to;
      } else {
        ASSERT_EQ(out.size(), 1u);
        cur = out.front().to;
      }
    }
    EXPECT_EQ(walked, executed);
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(Simplify, ConstantFalseRemovesThenBlock) {
  auto ast = norm("if (FALSE) x <- 1\ny <- 2");
  Cfg cfg = build_cfg(ast);
  auto s = simplify_cfg(cfg, literal_conditions(ast));
  ASSERT_EQ(s.dead.size(), 1u);
  EXPECT_EQ(ast.text(s.dead.begin()->second.nodes.front()), "x <- 1");
  EXPECT_FALSE(find_block(s.cfg, ast, "x <- 1"));
  EXPECT_TRUE(find_block(s.cfg, ast, "y <- 2"));
}

TEST(Simplify, ConstantTrueRemovesElseBlock) {
  auto ast = norm("if (TRUE) x <- 1 else y <- 2");
  auto s = simplify_cfg(build_cfg(ast), literal_conditions(ast));
  ASSERT_EQ(s.dead.size(), 1u);
  EXPECT_EQ(ast.text(s.dead.begin()->second.nodes.front()), "y <- 2");
}

TEST(Simplify, UnknownConditionLeavesGraphUnchanged) {
  auto ast = norm("if (c) x <- 1 else y <- 2");
  Cfg cfg = build_cfg(ast);
  auto s = simplify_cfg(cfg, literal_conditions(ast));
  EXPECT_TRUE(s.dead.empty());
  EXPECT_EQ(s.cfg, cfg);
}

TEST(Simplify, IsIdempotentAndKeepsExit) {
  auto ast = norm("while (TRUE) { x <- 1 }\nif (FALSE) { y <- 1 } else { z <- 2 }");
  auto once = simplify_cfg(build_cfg(ast), literal_conditions(ast));
  auto twice = simplify_cfg(once.cfg, literal_conditions(ast));
  EXPECT_EQ(twice.cfg, once.cfg);
  EXPECT_TRUE(twice.dead.empty());
  EXPECT_TRUE(once.cfg.blocks().count(once.cfg.exit));
}

TEST(Simplify, NeverRemovesReachableBlocks) {
  std::mt19937 rng(9);
  for (int i = 0; i < 100; ++i) {
    std::string code = oracle::generate_program(rng, {});
    // Turn every generated condition into a literal one.
    std::string literal;
    for (std::size_t p = 0; p < code.size(); ++p) {
      if (code.compare(p, 4, "if (") == 0) {
        std::size_t close = code.find(") {", p);
        literal += (i + p) % 2 ? "if (TRUE" : "if (FALSE";
        p = close - 1;
        continue;
      }
      literal += code[p];
    }
    auto ast = norm(literal);
    oracle::RunResult run;
    try {
      run = oracle::run(ast, 100000);
    } catch (const oracle::EvalError &) {
      continue;
    }
    auto s = simplify_cfg(build_cfg(ast), literal_conditions(ast));
    for (const auto &[id, b] : s.dead)
      for (NodeId n : b.nodes)
        EXPECT_FALSE(run.values.count(n)) << literal;
  }
}

TEST(Cfg, MermaidMarksDeadBlocks) {
  auto ast = norm("if (FALSE) x <- 1");
  auto s = simplify_cfg(build_cfg(ast), literal_conditions(ast));
  std::string m = render_mermaid(s.cfg, ast, s.dead);
  EXPECT_EQ(m.rfind("flowchart TD\n", 0), 0u);
  EXPECT_NE(m.find(":::dead"), std::string::npos) << m;
  EXPECT_NE(m.find("{{\"FALSE\"}}"), std::string::npos) << m;
}
