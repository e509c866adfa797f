#include "rflow/queries.hpp"

#include <gtest/gtest.h>

using namespace rflow;
using nlohmann::json;

namespace {

const std::string kFixtures = RFLOW_FIXTURES;

AnalysisPtr walkthrough() { return Analysis::build(AnalysisRequest::file(kFixtures + "/walkthrough.R")); }

std::vector<std::pair<std::string, std::string>> linked_names(const Analysis &a) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto &[create, calls] : link_plot_addons(a).linked)
    for (NodeId c : calls)
      out.emplace_back(a.ast().text(create), a.ast().call_name(c));
  return out;
}

} // namespace

TEST(Dependencies, Walkthrough) {
  auto a = walkthrough();
  DependencyReport r = dependencies(*a);
  ASSERT_EQ(r.libraries.size(), 2u);
  EXPECT_EQ(r.libraries[0].name, "ggplot2");
  EXPECT_EQ(r.libraries[0].via, "library");
  EXPECT_EQ(a->locate(r.libraries[0].node).range.start.line, 1);
  EXPECT_EQ(r.libraries[1].name, "dplyr");
  EXPECT_EQ(r.libraries[1].via, "::");
  EXPECT_EQ(a->locate(r.libraries[1].node).range.start.line, 6);

  ASSERT_EQ(r.reads.size(), 1u);
  EXPECT_EQ(r.reads[0].function, "read.csv");
  EXPECT_EQ(r.reads[0].path, "\"/data/data.csv\"");
  EXPECT_EQ(a->locate(r.reads[0].node).range.start.line, 3);
  EXPECT_TRUE(r.writes.empty());

  ASSERT_EQ(r.visualizations.size(), 1u);
  EXPECT_EQ(r.visualizations[0].function, "ggplot");
  ASSERT_EQ(r.visualizations[0].linked.size(), 1u);
  EXPECT_EQ(a->ast().call_name(r.visualizations[0].linked[0]), "geom_count");
  EXPECT_TRUE(r.unlinked.empty());
}

TEST(Dependencies, EmptyProgram) {
  json j = to_json(dependencies(*Analysis::from_text("")), *Analysis::from_text(""));
  for (const char *k : {"libraries", "reads", "writes", "visualizations", "unlinked"})
    EXPECT_TRUE(j.at(k).empty()) << k;
}

TEST(Dependencies, TextTree) {
  auto a = walkthrough();
  EXPECT_EQ(render_tree(dependencies(*a), *a), "Libraries (2)\n"
                                               "  ggplot2 via library @ 1:1\n"
                                               "  dplyr via :: @ 6:5\n"
                                               "Reads (1)\n"
                                               "  read.csv \"/data/data.csv\" @ 3:9\n"
                                               "Writes (0)\n"
                                               "  (none)\n"
                                               "Visualizations (1)\n"
                                               "  ggplot @ 8:1\n"
                                               "    + geom_count @ 9:5\n");
}

TEST(Dependencies, ComputedPathsAndRequire) {
  auto a = Analysis::from_text("require(\"stats\")\nlib <- \"tidyr\"\nlibrary(lib, character.only = TRUE)\n"
                               "base <- \"out\"\nwrite.csv(x, file.path(base, \"a.csv\"))\n"
                               "saveRDS(x, paste0(\"run\", sample(9), \".rds\"))\nsource(\"helpers.R\")\n"
                               "dplyr::select(x)\ndplyr::mutate(x)\n");
  DependencyReport r = dependencies(*a);
  std::vector<std::string> libs;
  for (const auto &l : r.libraries)
    libs.push_back(l.name + "/" + l.via);
  EXPECT_EQ(libs, (std::vector<std::string>{"stats/require", "tidyr/library", "dplyr/::"}));
  ASSERT_EQ(r.writes.size(), 2u);
  EXPECT_EQ(r.writes[0].path, "\"out/a.csv\"");
  EXPECT_EQ(r.writes[1].path, "⊤");
  ASSERT_EQ(r.reads.size(), 1u);
  EXPECT_EQ(to_json(r, *a)["reads"][0]["via"], "source");
}

TEST(PlotLinks, PlusChainThroughVariables) {
  auto a = Analysis::from_text("p <- ggplot(d, aes(x)) + geom_point()\np <- p + theme_bw()\np + labs(x = 1)\n"
                               "geom_line()\nq <- unknown() + geom_bar()\n");
  EXPECT_EQ(linked_names(*a), (std::vector<std::pair<std::string, std::string>>{
                                  {"ggplot(d, aes(x))", "geom_point"},
                                  {"ggplot(d, aes(x))", "theme_bw"},
                                  {"ggplot(d, aes(x))", "labs"}}));
  PlotLinks links = link_plot_addons(*a);
  ASSERT_EQ(links.unlinked.size(), 1u);
  EXPECT_EQ(a->ast().call_name(links.unlinked[0]), "geom_bar");
}

TEST(PlotLinks, BaseGraphicsFollowDominatingCreate) {
  EXPECT_EQ(linked_names(*Analysis::from_text("plot(x); abline(h=1)")),
            (std::vector<std::pair<std::string, std::string>>{{"plot(x)", "abline"}}));
  EXPECT_EQ(linked_names(*Analysis::from_text("plot(x)\nplot(y)\nlines(z)")),
            (std::vector<std::pair<std::string, std::string>>{{"plot(y)", "lines"}}));
  auto branchy = Analysis::from_text("plot(x)\nif (k) hist(y)\npoints(z)\nif (k) {\n  barplot(w)\n  legend(1)\n}");
  EXPECT_EQ(linked_names(*branchy), (std::vector<std::pair<std::string, std::string>>{
                                        {"plot(x)", "points"}, {"barplot(w)", "legend"}}));
  auto lonely = Analysis::from_text("lines(z)\nplot(x)");
  EXPECT_EQ(link_plot_addons(*lonely).unlinked.size(), 1u);
}

TEST(PlotLinks, LinkedCallsAreNeverRoots) {
  auto a = Analysis::from_text("plot(1)\nlines(2)\nggplot(d) + geom_point()");
  DependencyReport r = dependencies(*a);
  std::set<NodeId> roots, linked;
  for (const auto &v : r.visualizations) {
    roots.insert(v.node);
    linked.insert(v.linked.begin(), v.linked.end());
  }
  for (NodeId l : linked)
    EXPECT_FALSE(roots.count(l));
  EXPECT_EQ(r.visualizations.size(), 2u);
}

TEST(RunQuery, WalkthroughValues) {
  auto a = walkthrough();
  json r = run_query(*a, json::parse(R"([
    {"type": "resolve-value", "criteria": ["4@min_age", "99@nothing"]},
    {"type": "df-shape", "criterion": "5@by_age"},
    {"type": "dependencies"}
  ])"));
  EXPECT_EQ(r["resolve-value"]["results"][0]["value"], "[42L, 42L]");
  EXPECT_TRUE(r["resolve-value"]["results"][1].contains("error"));
  EXPECT_EQ(r["df-shape"]["shape"], "a data frame with an unknown number of rows, and known columns: none");
  EXPECT_EQ(r["dependencies"]["libraries"].size(), 2u);
  EXPECT_EQ(r["dependencies"]["libraries"][1]["location"],
            (json{{"line", 6}, {"column", 5}, {"endLine", 6}, {"endColumn", 17}}));
}

TEST(RunQuery, ForwardSliceMatchesSlicer) {
  auto a = walkthrough();
  json r = run_query(*a, json::parse(R"([{"type":"static-slice","criteria":["3@read.csv"],"direction":"forward"}])"));
  SliceResult direct = a->slicer().forward(std::vector<std::string>{"3@read.csv"});
  EXPECT_EQ(r["static-slice"]["ids"].get<std::vector<NodeId>>(),
            std::vector<NodeId>(direct.included.begin(), direct.included.end()));
  EXPECT_EQ(r["static-slice"]["lines"].get<std::vector<int>>(), (std::vector<int>{3, 5, 6, 8, 9}));
}

TEST(RunQuery, ErrorsStayLocal) {
  auto a = Analysis::from_text("x <- 2");
  json r = run_query(*a, json::parse(R"([
    {"type": "frobnicate"},
    {"type": "static-slice", "criteria": ["7:7"]},
    {"type": "static-slice", "criteria": ["$2"]},
    {"type": "static-slice", "criteria": ["$2"], "direction": "sideways"},
    {"nope": 1},
    {"type": "lint", "rules": ["unused-definition"]}
  ])"));
  EXPECT_EQ(r["frobnicate"]["error"], "unknown query type \"frobnicate\"");
  EXPECT_TRUE(r["static-slice"].contains("error"));
  EXPECT_EQ(r["static-slice#2"]["ids"], (json{0, 1, 2}));
  EXPECT_TRUE(r["static-slice#3"].contains("error"));
  EXPECT_EQ(r["#4"]["error"], "query without a type");
  ASSERT_EQ(r["lint"]["diagnostics"].size(), 1u);
  EXPECT_EQ(r["lint"]["diagnostics"][0]["rule"], "unused-definition");
  EXPECT_EQ(r["lint"]["rules"].size(), 1u);
  EXPECT_EQ(run_query(*a, json::object())["error"]["error"], "queries must be a list");
}

TEST(RunQuery, Deterministic) {
  auto a = walkthrough();
  json q = json::parse(R"([{"type":"dependencies"},{"type":"lint"},{"type":"static-slice","criteria":["8:1"]}])");
  EXPECT_EQ(run_query(*a, q).dump(), run_query(*a, q).dump());
}

TEST(RunQuery, NotebookLocationsCarryCells) {
  auto a = Analysis::build(AnalysisRequest::file(kFixtures + "/analysis.qmd"));
  json deps = run_query(*a, json::parse(R"([{"type":"dependencies"}])"))["dependencies"];
  for (const auto &group : {"libraries", "reads", "writes", "visualizations"})
    for (const auto &item : deps[group])
      EXPECT_TRUE(item["location"].contains("cell")) << item;
}
