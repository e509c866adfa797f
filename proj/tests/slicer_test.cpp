#include "rflow/slicer.hpp"
#include "support/checks.hpp"

#include <gtest/gtest.h>

using namespace rflow;

namespace {

struct Sliced {
  NormalizedAst ast;
  DataflowResult df;
  BuiltInRegistry registry = BuiltInRegistry::defaults();
  std::unique_ptr<Slicer> slicer;

  explicit Sliced(const SourceText &src) : ast(parse_normalized(src)) {
    df = build_dataflow(ast, registry);
    slicer = std::make_unique<Slicer>(ast, df.graph, registry);
  }
  explicit Sliced(const std::string &code) : Sliced(SourceText("<test>", code)) {}
};

SourceText walkthrough() { return SourceText::from_file(RFLOW_FIXTURES "/walkthrough.R"); }

NodeId call_named(const NormalizedAst &ast, const std::string &name) {
  for (const auto &n : ast.nodes())
    if (n.kind == NodeKind::FunctionCall && ast.call_name(n.id) == name)
      return n.id;
  throw std::runtime_error("no call " + name);
}

} // namespace

TEST(Criterion, ResolvesAllThreeForms) {
  auto ast = parse_normalized(SourceText("<t>", "x <- 2\ny <- 3\nprint(x)"));
  EXPECT_EQ(resolve_criterion("$2", ast), 2u);
  NodeId p = resolve_criterion("3@print", ast);
  EXPECT_EQ(ast[p].kind, NodeKind::Symbol);
  EXPECT_EQ(ast[p].lexeme, "print");
  NodeId c = resolve_criterion("3:7", ast);
  EXPECT_EQ(ast[c].lexeme, "x");
  EXPECT_EQ(resolve_criterion("1:1", ast), 0u);
}

TEST(Criterion, Errors) {
  auto ast = parse_normalized(SourceText("<t>", "x <- 2\ny <- 3\nprint(x)"));
  try {
    resolve_criterion("9:9", ast);
    FAIL();
  } catch (const CriterionError &e) {
    EXPECT_NE(std::string(e.what()).find("criterion 9:9 does not match"), std::string::npos);
  }
  EXPECT_THROW(resolve_criterion("$999", ast), CriterionError);
  EXPECT_THROW(resolve_criterion("2@z", ast), CriterionError);
  EXPECT_THROW(resolve_criterion("nonsense", ast), CriterionError);
}

TEST(Slice, BackwardSkipsIndependentLine) {
  Sliced s("x <- 2\ny <- 3\nprint(x)");
  auto r = s.slicer->backward(std::vector<std::string>{"3@print"});
  EXPECT_EQ(r.lines, (std::set<int>{1, 3}));
  EXPECT_EQ(r.text, "x <- 2\nprint(x)\n");
  EXPECT_TRUE(std::includes(r.included.begin(), r.included.end(), r.criterion_ids.begin(),
                            r.criterion_ids.end()));
}

TEST(Slice, BackwardOfDefinitionIsItself) {
  Sliced s("x <- 2\ny <- 3\nprint(x)");
  auto r = s.slicer->backward(std::vector<std::string>{"$2"});
  EXPECT_EQ(r.lines, (std::set<int>{1}));
}

TEST(Slice, ForwardReachesUses) {
  Sliced s("x <- 2\nprint(x)");
  EXPECT_EQ(s.slicer->forward(std::vector<std::string>{"1@x"}).lines, (std::set<int>{1, 2}));
  auto last = s.slicer->forward(std::vector<std::string>{"$" + std::to_string(call_named(s.ast, "print"))});
  EXPECT_EQ(last.lines, (std::set<int>{2}));
}

TEST(Slice, WalkthroughForwardFromReadCsv) {
  Sliced s(walkthrough());
  auto r = s.slicer->forward(NodeSet{call_named(s.ast, "read.csv")});
  EXPECT_EQ(r.lines, (std::set<int>{3, 5, 6, 8, 9}));
}

TEST(Slice, WalkthroughBackwardFromGgplot) {
  Sliced s(walkthrough());
  auto r = s.slicer->backward(NodeSet{call_named(s.ast, "ggplot")});
  // library(ggplot2) is kept because ggplot comes from that package.
  EXPECT_EQ(r.lines, (std::set<int>{1, 3, 4, 5, 6, 8, 9}));
}

TEST(Slice, WalkthroughChop) {
  Sliced s(walkthrough());
  NodeId plus = s.ast[s.ast.root()].children.back();
  auto r = s.slicer->chop(NodeSet{call_named(s.ast, "read.csv")}, NodeSet{plus});
  EXPECT_EQ(r.lines, (std::set<int>{3, 5, 6, 8, 9}));
  EXPECT_EQ(r.direction, SliceDirection::Chop);
}

TEST(Slice, ChopOfIndependentAssignmentsIsEmpty) {
  Sliced s("a <- 1\nb <- 2");
  auto r = s.slicer->chop(std::vector<std::string>{"1@a"}, std::vector<std::string>{"2@b"});
  EXPECT_TRUE(r.included.empty());
  EXPECT_EQ(r.text, "");
  auto same = s.slicer->chop(std::vector<std::string>{"1@a"}, std::vector<std::string>{"1@a"});
  EXPECT_TRUE(same.included.count(resolve_criterion("1@a", s.ast)));
}

TEST(Slice, GuardedDefinitionPullsInCondition) {
  Sliced s("c <- 1\nx <- 0\nif (c > 0) {\n  x <- 5\n}\nprint(x)");
  auto r = s.slicer->backward(std::vector<std::string>{"6@print"});
  EXPECT_EQ(r.lines, (std::set<int>{1, 2, 3, 4, 5, 6}));
  auto f = s.slicer->forward(std::vector<std::string>{"1@c"});
  EXPECT_TRUE(f.lines.count(4));
  EXPECT_FALSE(f.lines.count(2));
}

TEST(Slice, LoopBreakControlsBody) {
  Sliced s("i <- 0\nk <- 0\nwhile (TRUE) {\n  if (i > 3) break\n  k <- k + 1\n  i <- i + 1\n}\nprint(k)");
  auto r = s.slicer->backward(std::vector<std::string>{"8@print"});
  EXPECT_EQ(r.lines, (std::set<int>{1, 2, 3, 4, 5, 6, 7, 8}));
}

TEST(Slice, MonotoneInCriteria) {
  Sliced s(walkthrough());
  NodeSet one{call_named(s.ast, "read.csv")};
  NodeSet two = one;
  two.insert(resolve_criterion("4@min_age", s.ast));
  auto a = s.slicer->backward(one).included;
  auto b = s.slicer->backward(two).included;
  EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
}

TEST(Slice, MatchesBruteForceOracle) {
  auto r = oracle::check_slicing_oracle(60, 17);
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Slice, BackwardSlicesAreExecutable) {
  auto r = oracle::check_executable_slices(60, 23);
  EXPECT_TRUE(r.ok) << r.detail;
}
