#include "rflow/abstractval.hpp"
#include "rflow/slicer.hpp"
#include "support/checks.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rflow;

namespace {

constexpr double kInf = INFINITY;

struct Resolved {
  NormalizedAst ast;
  DataflowResult df;
  std::unique_ptr<ValueResolver> resolver;

  explicit Resolved(const SourceText &src, ResolverOptions options = {})
      : ast(parse_normalized(src)) {
    df = build_dataflow(ast, BuiltInRegistry::defaults());
    resolver = std::make_unique<ValueResolver>(ast, df.graph, std::move(options));
  }
  explicit Resolved(const std::string &code, ResolverOptions options = {})
      : Resolved(SourceText("<test>", code), std::move(options)) {}

  AbstractValue at(const std::string &criterion) {
    return resolver->value(resolve_criterion(criterion, ast));
  }
  // Shape of the last top-level expression.
  DataFrameShape last_shape() { return resolver->shape(ast[ast.root()].children.back()); }
};

AbstractValue strings(std::set<std::string> s) { return AbstractValue(StringSet{std::move(s), false}); }

} // namespace

TEST(Value, IntegralLiteralRendersWithSuffix) {
  Resolved r("min_age <- 42\nprint(min_age)");
  EXPECT_EQ(r.at("1@min_age").render(), "[42L, 42L]");
  EXPECT_EQ(r.at("2@min_age").render(), "[42L, 42L]");
}

TEST(Value, LiteralKinds) {
  Resolved r("a <- 1.5\nb <- 3L\nc <- TRUE\nd <- 0x10\ne <- Inf\nf <- NULL");
  EXPECT_EQ(r.at("1@a").render(), "[1.5, 1.5]");
  EXPECT_EQ(r.at("2@b").render(), "[3L, 3L]");
  EXPECT_EQ(r.at("3@c").render(), "TRUE");
  EXPECT_EQ(r.at("4@d").render(), "[16L, 16L]");
  EXPECT_EQ(r.at("5@e").render(), "[Inf, Inf]");
  EXPECT_TRUE(r.at("6@f").is_top());
}

TEST(Value, StringAtUse) {
  Resolved r("coln <- \"id\"\nprint(coln)");
  EXPECT_EQ(r.at("2@coln"), AbstractValue::string("id"));
  EXPECT_EQ(r.at("2@coln").render(), "\"id\"");
}

TEST(Value, BranchesJoinToHull) {
  Resolved r("c <- runif(1) > 0.5\nif (c) x <- 1 else x <- 2\nprint(x)");
  EXPECT_EQ(r.at("3@x"), AbstractValue::interval(1, 2, true));
  EXPECT_EQ(r.at("3@x").render(), "[1L, 2L]");
}

TEST(Value, DecidedConditionSelectsBranch) {
  Resolved r("y <- if (1 < 2) 10 else \"no\"\nprint(y)");
  EXPECT_EQ(r.at("2@y").render(), "[10L, 10L]");
}

TEST(Value, MixedKindsJoinToTop) {
  Resolved r("if (runif(1) > 0) x <- 1 else x <- \"a\"\nprint(x)");
  EXPECT_TRUE(r.at("2@x").is_top());
}

TEST(Value, Arithmetic) {
  Resolved r("a <- 3\nb <- a * 2 - 1\nc <- b / 2\nd <- 2 ^ 3\ne <- -a\nf <- a / 0\ng <- a > 2");
  EXPECT_EQ(r.at("2@b").render(), "[5L, 5L]");
  EXPECT_EQ(r.at("3@c").render(), "[2.5, 2.5]");
  EXPECT_EQ(r.at("4@d").render(), "[8L, 8L]");
  EXPECT_EQ(r.at("5@e").render(), "[-3L, -3L]");
  EXPECT_EQ(r.at("6@f"), AbstractValue::interval(-kInf, kInf, false));
  EXPECT_EQ(r.at("7@g").render(), "TRUE");
}

TEST(Value, UnknownCallsAreTop) {
  Resolved r("x <- foo(1)\ny <- stats::rnorm(1)");
  EXPECT_TRUE(r.at("1@x").is_top());
  EXPECT_TRUE(r.at("2@y").is_top());
}

TEST(Value, PasteOfSingletons) {
  Resolved r("dir <- \"data\"\np <- paste0(dir, \"/x.csv\")\nq <- paste(\"a\", 1)");
  EXPECT_EQ(r.at("2@p").render(), "\"data/x.csv\"");
  EXPECT_EQ(r.at("3@q").render(), "\"a 1\"");
}

TEST(Value, UserFunctionReturns) {
  Resolved r("f <- function(a) a + 1\nx <- f(1)\ny <- f(5)");
  // Parameters join every call site's argument.
  EXPECT_EQ(r.at("2@x").render(), "[2L, 6L]");
}

TEST(Value, LoopCounterIsWidened) {
  Resolved r("i <- 0\nwhile (i < 10) {\n  i <- i + 1\n}\nprint(i)");
  AbstractValue v = r.at("5@i");
  ASSERT_NE(v.as_interval(), nullptr);
  EXPECT_EQ(v.as_interval()->lo, 0);
  EXPECT_EQ(v.as_interval()->hi, kInf);
  EXPECT_TRUE(v.as_interval()->integral);
  EXPECT_LE(r.resolver->max_rounds(), 4);
}

TEST(Value, StableLoopValueIsNotWidened) {
  Resolved r("x <- 1\nwhile (runif(1) > 0.5) {\n  x <- 2\n}\nprint(x)");
  EXPECT_EQ(r.at("5@x").render(), "[1L, 2L]");
}

TEST(Value, FuelIsConfigurable) {
  const char *code = "i <- 0\nwhile (i < 10) {\n  i <- i + 1\n}\nprint(i)";
  Resolved lean(code, ResolverOptions{0, {}});
  Resolved rich(code, ResolverOptions{6, {}});
  EXPECT_EQ(lean.at("5@i"), rich.at("5@i"));
  // One evaluation, one widening step, one check that nothing moved.
  EXPECT_LE(lean.resolver->max_rounds(), 3);
  EXPECT_LE(rich.resolver->max_rounds(), 8);
}

TEST(Value, ConditionTruths) {
  Resolved r("if (FALSE) a <- 1\nwhile (TRUE) break\nif (runif(1) > 0) b <- 2");
  auto truths = condition_truths(r.ast, *r.resolver);
  std::vector<Truth> got;
  for (const auto &[id, t] : truths)
    got.push_back(t);
  EXPECT_EQ(got, (std::vector<Truth>{Truth::AlwaysFalse, Truth::AlwaysTrue, Truth::Unknown}));
}

TEST(Widen, Examples) {
  EXPECT_EQ(widen(AbstractValue::interval(0, 1, true), AbstractValue::interval(0, 2, true)),
            AbstractValue::interval(0, kInf, true));
  EXPECT_EQ(widen(AbstractValue::interval(0, 2, true), AbstractValue::interval(0, 2, true)),
            AbstractValue::interval(0, 2, true));
  EXPECT_EQ(widen(strings({"a"}), strings({"a", "b"})), strings({"a", "b"}));
  EXPECT_EQ(widen(AbstractValue::interval(0, 1, true), AbstractValue::interval(-1, 1, true)),
            AbstractValue::interval(-kInf, 1, true));
}

TEST(Widen, LargeStringSetsGoToAnyString) {
  std::set<std::string> many;
  for (char c = 'a'; c < 'a' + 9; ++c)
    many.insert(std::string(1, c));
  AbstractValue w = widen(strings({"a"}), strings(many));
  ASSERT_NE(w.as_strings(), nullptr);
  EXPECT_TRUE(w.as_strings()->any);
  EXPECT_EQ(w.render(), "⊤");
}

TEST(Join, LatticeLaws) {
  std::vector<AbstractValue> xs = {
      AbstractValue::bottom(),          AbstractValue::top(),
      AbstractValue::number(1, true),   AbstractValue::interval(-2, 0.5, false),
      AbstractValue::interval(3, kInf, true), strings({"a"}),
      strings({"b", "c"}),              AbstractValue(StringSet{{}, true}),
      AbstractValue::logical(true),     AbstractValue::logical(false),
  };
  for (const auto &a : xs) {
    EXPECT_EQ(join(a, a), a);
    EXPECT_EQ(join(a, AbstractValue::bottom()), a);
    for (const auto &b : xs) {
      EXPECT_EQ(join(a, b), join(b, a));
      for (const auto &c : xs)
        EXPECT_EQ(join(join(a, b), c), join(a, join(b, c)));
    }
  }
}

TEST(Render, Forms) {
  EXPECT_EQ(AbstractValue::top().render(), "⊤");
  EXPECT_EQ(AbstractValue::bottom().render(), "⊥");
  EXPECT_EQ(strings({"b", "a"}).render(), "\"a\", \"b\"");
  EXPECT_EQ(AbstractValue::any_logical().render(), "TRUE, FALSE");
  EXPECT_EQ(AbstractValue::interval(-kInf, 0, true).render(), "[-Inf, 0L]");
  for (int n : {0, 7, -3, 1000000})
    EXPECT_EQ(AbstractValue::number(n, true).render(),
              "[" + std::to_string(n) + "L, " + std::to_string(n) + "L]");
}

TEST(Shape, MutateJoinSelectPipeline) {
  Resolved r("a <- data.frame(foo=c(1,2,3,4), score=c(5,6,7,8), id=c(1,2,3,4))\n"
             "b <- data.frame(id=c(1,2,3,4), age=c(20,30,40,50))\n"
             "coln <- \"id\"\n"
             "res <- a |> mutate(level=score^2) |> left_join(b, by=coln) |> select(-age)\n");
  DataFrameShape s = r.last_shape();
  EXPECT_EQ(s.columns, (std::vector<std::string>{"foo", "score", "level", "id"}));
  EXPECT_FALSE(s.open);
  EXPECT_EQ(s.rows, (std::pair{4.0, 4.0}));
  EXPECT_EQ(s.render(), "a data frame with 4 rows, and known columns: foo, score, level, id");
  EXPECT_EQ(r.at("4@coln").render(), "\"id\"");
}

TEST(Shape, ConstructorRows) {
  Resolved r("d <- data.frame(x = 1:3, y = \"k\")");
  EXPECT_EQ(r.last_shape().render(), "a data frame with 3 rows, and known columns: x, y");
  Resolved mismatch("d <- data.frame(x = c(1, 2), y = c(1, 2, 3))");
  EXPECT_FALSE(mismatch.last_shape().rows.has_value());
  EXPECT_FALSE(mismatch.last_shape().open);
}

TEST(Shape, UnreadableCsvIsOpenAndEmpty) {
  Resolved r("d <- read.csv(\"missing.csv\")");
  DataFrameShape s = r.last_shape();
  EXPECT_TRUE(s.open);
  EXPECT_TRUE(s.columns.empty());
  EXPECT_FALSE(s.rows.has_value());
  EXPECT_EQ(s.render(), "a data frame with an unknown number of rows, and known columns: none");
}

TEST(Shape, ReadableCsv) {
  ResolverOptions options;
  options.read_file = [](const std::string &path) -> std::optional<std::string> {
    if (path == "people.csv")
      return "\"name\",age\nann,30\nbob,41\n\n";
    return std::nullopt;
  };
  Resolved r("f <- \"people.csv\"\nd <- read.csv(f)", options);
  EXPECT_EQ(r.last_shape().render(), "a data frame with 2 rows, and known columns: name, age");
}

TEST(Shape, FilterKeepsUpperBound) {
  Resolved r("d <- data.frame(a = c(1, 2, 3, 4))\ne <- filter(d, a > 2)");
  DataFrameShape s = r.last_shape();
  EXPECT_EQ(s.rows, (std::pair{0.0, 4.0}));
  EXPECT_EQ(s.render(), "a data frame with between 0 and 4 rows, and known columns: a");
}

TEST(Shape, SelectKeepList) {
  Resolved r("d <- read.csv(\"missing.csv\")\ne <- d |> select(a, b)");
  DataFrameShape s = r.last_shape();
  EXPECT_EQ(s.columns, (std::vector<std::string>{"a", "b"}));
  EXPECT_FALSE(s.open);
}

TEST(Shape, ColumnAssignmentAddsColumn) {
  Resolved r("d <- data.frame(a = 1)\nd$b <- 2\nprint(d)");
  EXPECT_EQ(r.resolver->shape(resolve_criterion("3@d", r.ast)).columns,
            (std::vector<std::string>{"a", "b"}));
}

TEST(Shape, NonFrameIsUnknown) {
  Resolved r("x <- 1");
  EXPECT_FALSE(r.last_shape().known());
}

TEST(Shape, UnknownInputStaysOpen) {
  Resolved r("e <- mutate(g(), z = 1)");
  DataFrameShape s = r.last_shape();
  EXPECT_TRUE(s.open);
  EXPECT_EQ(s.columns, (std::vector<std::string>{"z"}));
  EXPECT_EQ(s.render(),
            "a data frame with an unknown number of rows, and known columns: z (possibly more)");
}

TEST(Shape, CustomTransformer) {
  auto ast = parse_normalized(SourceText("<t>", "d <- make_frame()"));
  auto df = build_dataflow(ast, BuiltInRegistry::defaults());
  ShapeTransformers t = ShapeTransformers::defaults();
  t.set("make_frame", [](ValueResolver &, NodeId) {
    return DataFrameShape{{"k"}, false, std::pair{1.0, 1.0}};
  });
  ValueResolver resolver(ast, df.graph, {}, t);
  EXPECT_EQ(resolver.shape(ast.root()).render(), "a data frame with 1 row, and known columns: k");
}

TEST(Soundness, StraightLinePrograms) {
  auto r = oracle::check_value_soundness(150, 5, false);
  EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Soundness, LoopPrograms) {
  auto r = oracle::check_value_soundness(150, 11, true);
  EXPECT_TRUE(r.ok) << r.detail;
}
