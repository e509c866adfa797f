#include "rflow/ast.hpp"
#include "rflow/reprint.hpp"
#include "support/generator.hpp"

#include <gtest/gtest.h>

#include <functional>

using namespace rflow;

namespace {

NormalizedAst norm(const std::string &code) { return parse_normalized(SourceText("<test>", code)); }

// Structural shape ignoring ids and locations.
std::string shape(const NormalizedAst &ast, NodeId id) {
  const AstNode &n = ast[id];
  std::string s = std::string(kind_name(n.kind)) + "(" + n.lexeme;
  for (NodeId c : n.children)
    s += " " + shape(ast, c);
  return s + ")";
}
std::string shape(const NormalizedAst &ast) { return shape(ast, ast.root()); }

void check_invariants(const NormalizedAst &ast) {
  ASSERT_GT(ast.size(), 0u);
  EXPECT_EQ(ast[ast.root()].kind, NodeKind::ExpressionList);
  for (const AstNode &n : ast.nodes()) {
    EXPECT_NE(n.kind, NodeKind::Pipe);
    EXPECT_NE(n.kind, NodeKind::RightAssignment);
    EXPECT_NE(n.kind, NodeKind::Paren);
    for (NodeId c : n.children) {
      EXPECT_LT(c, n.id) << "post-order violated at " << n.id;
      EXPECT_TRUE(n.range.contains(ast[c].range))
          << "child " << c << " " << to_string(ast[c].range) << " escapes parent " << n.id << " "
          << to_string(n.range);
      EXPECT_EQ(ast[c].parent, n.id);
    }
    EXPECT_TRUE(ast.source().in_bounds(n.range.start));
  }
  // Descendants of a node occupy exactly the id range just below it.
  std::function<std::size_t(NodeId)> count = [&](NodeId id) {
    std::size_t total = 1;
    for (NodeId c : ast[id].children)
      total += count(c);
    return total;
  };
  EXPECT_EQ(count(ast.root()), ast.size());
}

} // namespace

TEST(Parse, MinimalAssignment) {
  auto ast = norm("x <- 2");
  EXPECT_EQ(shape(ast), "ExpressionList( Assignment(<- Symbol(x) Number(2)))");
  EXPECT_EQ(ast[0].lexeme, "x");
  EXPECT_EQ(ast[1].lexeme, "2");
  EXPECT_EQ(ast[2].kind, NodeKind::Assignment);
  check_invariants(ast);
}

TEST(Parse, PipeIsOutermostOfRhs) {
  auto tree = parse(SourceText("<t>", "by_age <- data |> dplyr::filter(age >= min_age)"));
  const SyntaxNode &assign = tree.root.children.at(0);
  ASSERT_EQ(assign.kind, NodeKind::Assignment);
  EXPECT_EQ(assign.children[1].kind, NodeKind::Pipe);
  EXPECT_EQ(assign.children[1].children[1].kind, NodeKind::FunctionCall);
}

TEST(Parse, UnclosedIfReportsEndOfInput) {
  try {
    parse(SourceText("<t>", "if("));
    FAIL() << "expected ParseError";
  } catch (const ParseError &e) {
    EXPECT_EQ(e.where(), (Position{1, 4}));
  }
}

TEST(Parse, ErrorsCarryFirstOffendingLocation) {
  auto where = [](const std::string &code) {
    try {
      parse(SourceText("<t>", code));
    } catch (const ParseError &e) {
      return e.where();
    }
    return Position{0, 0};
  };
  EXPECT_EQ(where("x <- (1 + 2"), (Position{1, 12}));
  EXPECT_EQ(where("x <- 1 +"), (Position{1, 9}));
  EXPECT_EQ(where("y <- 'abc"), (Position{1, 6}));
  EXPECT_EQ(where("f(a))"), (Position{1, 5}));
  EXPECT_EQ(where("x <- }"), (Position{1, 6}));
}

TEST(Parse, Precedence) {
  EXPECT_EQ(shape(norm("-2^2")), "ExpressionList( UnaryOp(- BinaryOp(^ Number(2) Number(2))))");
  EXPECT_EQ(shape(norm("1:n-1")),
            "ExpressionList( BinaryOp(- BinaryOp(: Number(1) Symbol(n)) Number(1)))");
  EXPECT_EQ(shape(norm("!a == b")),
            "ExpressionList( UnaryOp(! BinaryOp(== Symbol(a) Symbol(b))))");
  EXPECT_EQ(shape(norm("a || b && c")),
            "ExpressionList( BinaryOp(|| Symbol(a) BinaryOp(&& Symbol(b) Symbol(c))))");
  EXPECT_EQ(shape(norm("x <- y <- 1")),
            "ExpressionList( Assignment(<- Symbol(x) Assignment(<- Symbol(y) Number(1))))");
  EXPECT_EQ(shape(norm("2^3^2")),
            "ExpressionList( BinaryOp(^ Number(2) BinaryOp(^ Number(3) Number(2))))");
}

TEST(Parse, NamedArgumentVersusAssignment) {
  auto ast = norm("aes(x=age, y=m)\nz = 3");
  EXPECT_EQ(shape(ast), "ExpressionList( FunctionCall(aes Symbol(aes) Argument(x Symbol(age)) "
                        "Argument(y Symbol(m))) Assignment(= Symbol(z) Number(3)))");
}

TEST(Parse, ControlFlowAndFunctions) {
  auto ast = norm("f <- function(a, b = 2) {\n  if (a > b) a else b\n}\n"
                  "for (i in 1:3) next\nwhile (TRUE) break\nrepeat { break }\n");
  check_invariants(ast);
  EXPECT_EQ(ast[ast.root()].children.size(), 4u);
  auto ast2 = norm("g <- \\(x) x + 1");
  EXPECT_EQ(ast2[ast2[ast2.root()].children[0]].kind, NodeKind::Assignment);
}

TEST(Parse, ElseOnNewLineOnlyInsideBraces) {
  EXPECT_NO_THROW(norm("{\n if (a) 1\n else 2\n}"));
  EXPECT_THROW(norm("if (a) 1\nelse 2"), ParseError);
}

TEST(Parse, IndexingAndNamespaces) {
  auto ast = norm("df$col\ndf[[\"a\"]]\ndf[, 1]\npkg::f(x)\nx[y[1]]");
  check_invariants(ast);
  const AstNode &call = ast[ast[ast.root()].children[3]];
  EXPECT_EQ(call.kind, NodeKind::FunctionCall);
  EXPECT_EQ(ast.call_name(call.id), "f");
  EXPECT_EQ(ast.call_namespace(call.id), "pkg");
}

TEST(Parse, StringEscapesAndComments) {
  auto tree = parse(SourceText("<t>", "s <- \"a\\\"b\\n\" # note\n# whole line\n"));
  EXPECT_EQ(tree.root.children[0].children[1].lexeme, "a\"b\n");
  ASSERT_EQ(tree.comments.size(), 2u);
  EXPECT_EQ(tree.comments[0].line, 1);
  EXPECT_EQ(tree.comments[1].text, "# whole line");
  EXPECT_THROW(parse(SourceText("<t>", "s <- '\\q'")), ParseError);
}

TEST(Parse, Utf8ColumnsCountCodePoints) {
  auto ast = norm("s <- \"äö\"; y <- 1");
  const AstNode &y = ast[ast[ast[ast.root()].children[1]].children[0]];
  EXPECT_EQ(y.range.start, (Position{1, 12}));
}

TEST(Normalize, PostOrderIdsForAssignment) {
  auto ast = norm("x <- 2");
  EXPECT_EQ(ast[0].kind, NodeKind::Symbol);
  EXPECT_EQ(ast[1].kind, NodeKind::Number);
  EXPECT_EQ(ast[2].kind, NodeKind::Assignment);
  EXPECT_EQ(ast.root(), 3u);
}

TEST(Normalize, RightAssignmentFlips) { EXPECT_EQ(shape(norm("2 -> x")), shape(norm("x <- 2"))); }

TEST(Normalize, PipesDesugarToCalls) {
  EXPECT_EQ(shape(norm("a |> f(b)")), shape(norm("f(a, b)")));
  EXPECT_EQ(shape(norm("a %>% f(b)")), shape(norm("f(a, b)")));
  EXPECT_EQ(shape(norm("a %>% f")), shape(norm("f(a)")));
  EXPECT_EQ(shape(norm("a |> f() |> g(1)")), shape(norm("g(f(a), 1)")));
  EXPECT_EQ(shape(norm("d |> dplyr::filter(x)")), shape(norm("dplyr::filter(d, x)")));
  EXPECT_THROW(norm("a |> b"), ParseError);
}

TEST(Normalize, InvariantsOnGeneratedPrograms) {
  std::mt19937 rng(7);
  for (int i = 0; i < 50; ++i) {
    auto ast = norm(oracle::generate_program(rng, {}));
    check_invariants(ast);
  }
}

TEST(Reprint, AllIdsGivesSourceBackModuloTrailingSpace) {
  std::string code = "x <- 2   \ny <- 3\nprint(x)";
  auto ast = norm(code);
  NodeSet all;
  for (const auto &n : ast.nodes())
    all.insert(n.id);
  EXPECT_EQ(reprint(ast, all), "x <- 2\ny <- 3\nprint(x)\n");
}

TEST(Reprint, EmptyKeepIsEmpty) { EXPECT_EQ(reprint(norm("x <- 1\ny <- 2"), {}), ""); }

TEST(Reprint, KeepsEnclosingControlFrames) {
  auto ast = norm("a <- 1\nif (a > 0) {\n  b <- 2\n  c <- 3\n} else {\n  d <- 4\n}\n");
  // Keep only `c <- 3`: the `if` header, `} else {` and closing brace stay.
  NodeId c_assign = 0;
  for (const auto &n : ast.nodes())
    if (n.kind == NodeKind::Assignment && ast[n.children[0]].lexeme == "c")
      c_assign = n.id;
  EXPECT_EQ(reprint(ast, {c_assign}), "if (a > 0) {\n  c <- 3\n} else {\n}\n");
  EXPECT_NO_THROW(norm(reprint(ast, {c_assign})));
}

TEST(Reprint, RejectsUnknownIds) { EXPECT_THROW(reprint(norm("x"), {99}), std::out_of_range); }

TEST(Reprint, RoundTripIsIsomorphicAndIdempotent) {
  std::mt19937 rng(11);
  for (int i = 0; i < 50; ++i) {
    auto ast = norm(oracle::generate_program(rng, {}));
    NodeSet all;
    for (const auto &n : ast.nodes())
      all.insert(n.id);
    std::string once = reprint(ast, all);
    auto again = norm(once);
    EXPECT_EQ(shape(again), shape(ast));
    NodeSet all2;
    for (const auto &n : again.nodes())
      all2.insert(n.id);
    EXPECT_EQ(reprint(again, all2), once);
  }
}

TEST(SourceText, OffsetsRoundTrip) {
  SourceText src("<t>", "ab\nçd\n\nxyz");
  for (std::size_t off = 0; off <= src.content().size(); ++off) {
    unsigned char c = off < src.content().size() ? src.content()[off] : 0;
    if ((c & 0xC0) == 0x80)
      continue;
    EXPECT_EQ(src.offset_of(src.position_of(off)), off);
  }
  EXPECT_EQ(src.line(2), "çd");
  EXPECT_FALSE(src.in_bounds({9, 1}));
}
