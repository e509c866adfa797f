#include "rflow/repl.hpp"
#include "support/channel.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace rflow;
using nlohmann::json;

namespace {

const std::string kFixtures = RFLOW_FIXTURES;

std::string eval(Repl &repl, const std::string &line) { return repl.eval(line).text; }

std::string transcript(const std::string &script) {
  std::istringstream in(script);
  std::ostringstream out;
  ReplSettings settings;
  settings.cwd = kFixtures;
  run_repl(in, out, settings);
  return out.str();
}

} // namespace

TEST(Repl, DataflowAsciiOfAssignment) {
  Repl repl;
  std::string out = eval(repl, ":dataflowascii x <- 2");
  std::string edges = out.substr(out.find("Edges:\n") + 7);
  EXPECT_EQ(edges, "0 -> 1: defined-by\n"
                   "0 -> 2: defined-by\n"
                   "2 -> 0: returns, argument\n"
                   "2 -> 1: reads, argument\n");
}

TEST(Repl, QuitAndUnknownCommands) {
  Repl repl;
  EXPECT_EQ(eval(repl, ":frobnicate"), "unknown command, use :help\n");
  EXPECT_FALSE(repl.done());
  ReplOutput q = repl.eval(":quit");
  EXPECT_TRUE(q.quit);
  EXPECT_TRUE(repl.done());
}

TEST(Repl, HelpListsEveryCommand) {
  Repl repl;
  std::string help = eval(repl, ":help");
  for (const char *c : {":help", ":quit", ":parse", ":normalize", ":dataflow ", ":dataflowascii", ":cfg",
                        ":slice", ":lint", ":query", ":dependencies"})
    EXPECT_NE(help.find(c), std::string::npos) << c;
}

TEST(Repl, BareLinesExtendTheSessionSource) {
  Repl repl;
  EXPECT_EQ(eval(repl, "x <- 1"), "");
  EXPECT_EQ(eval(repl, "y <- x + 2"), "");
  EXPECT_EQ(eval(repl, "z <- 5"), "");
  EXPECT_EQ(eval(repl, ":slice 2@y"), "x <- 1\ny <- x + 2\n");
  EXPECT_EQ(eval(repl, ":slice --forward 1@x"), "x <- 1\ny <- x + 2\n");
  json q = json::parse(eval(repl, ":query {\"type\":\"resolve-value\",\"criteria\":[\"2@y\"]}"));
  EXPECT_EQ(q["resolve-value"]["results"][0]["value"], "[3L, 3L]");
}

TEST(Repl, FailedInputKeepsTheSession) {
  Repl repl;
  eval(repl, "x <- 1");
  std::string err = eval(repl, "y <- (");
  EXPECT_EQ(err.rfind("error: parse error at 2:", 0), 0u) << err;
  EXPECT_EQ(eval(repl, ":slice 1@x"), "x <- 1\n");
  EXPECT_EQ(eval(repl, ":normalize").find("\"y\""), std::string::npos);
  EXPECT_EQ(eval(repl, ":slice 9@nope").rfind("error: ", 0), 0u);
  EXPECT_EQ(eval(repl, ":lint file://missing.R").rfind("error: cannot read", 0), 0u);
  EXPECT_EQ(repl.history().size(), 6u);
}

TEST(Repl, NoSourceYet) {
  Repl repl;
  EXPECT_EQ(eval(repl, ":cfg"), "error: no code given and no session source yet\n");
}

TEST(Repl, FileArgumentsResolveAgainstCwd) {
  ReplSettings settings;
  settings.cwd = kFixtures;
  Repl repl(settings);
  std::string lint = eval(repl, ":lint file://walkthrough.R");
  EXPECT_NE(lint.find("walkthrough.R:3:18 [warning] absolute-file-path"), std::string::npos) << lint;
  std::string deps = eval(repl, ":dependencies file://analysis.qmd");
  EXPECT_NE(deps.find("dplyr via library @ 9:1"), std::string::npos) << deps;
}

TEST(Repl, TreeDumps) {
  Repl repl;
  EXPECT_EQ(eval(repl, ":normalize x <- 2"), "3 ExpressionList @1:1-1:6\n"
                                            "  2 Assignment \"<-\" @1:1-1:6\n"
                                            "    0 Symbol \"x\" @1:1-1:1\n"
                                            "    1 Number \"2\" @1:6-1:6\n");
  EXPECT_NE(eval(repl, ":parse x |> f()").find("Pipe \"|>\""), std::string::npos);
  EXPECT_EQ(eval(repl, ":cfg x <- 1").rfind("flowchart TD", 0), 0u);
  EXPECT_EQ(eval(repl, ":dataflow x <- 1").rfind("flowchart", 0), 0u);
}

TEST(Repl, TranscriptIsDeterministic) {
  std::string script = "library(dplyr)\nd <- data.frame(a = 1)\ne <- mutate(d, b = a + 1)\n:lint\n"
                       ":query [{\"type\":\"df-shape\",\"criterion\":\"3@e\"}]\n:dependencies\n"
                       ":dataflowascii\n:quit\nignored\n";
  std::string first = transcript(script);
  EXPECT_EQ(first, transcript(script));
  EXPECT_EQ(first.rfind(Repl::banner(), 0), 0u);
  EXPECT_EQ(first.find("ignored"), std::string::npos);
  EXPECT_NE(first.find("known columns: a, b"), std::string::npos);
}

// ---- protocol ----

TEST(Protocol, HelloAnnouncesVersion) {
  json h = ProtocolSession::hello();
  EXPECT_EQ(h["type"], "hello");
  EXPECT_EQ(h["version"], kVersion);
}

TEST(Protocol, GoldenSessionInProcess) {
  auto channel = oracle::in_process();
  auto r = oracle::check_protocol_golden(kFixtures + "/protocol/session.json", *channel);
  EXPECT_TRUE(r.ok) << r.detail;
  EXPECT_EQ(r.checked, 16);
}

TEST(Protocol, GoldenMessagesRoundTrip) {
  std::ifstream in(kFixtures + "/protocol/session.json");
  for (const json &step : json::parse(in)) {
    for (const json &m : {step["request"], step["response"]}) {
      if (!m.is_string() && !m.is_object())
        continue;
      std::string text = m.is_string() ? m.get<std::string>() : m.dump();
      json parsed = json::parse(text, nullptr, false);
      if (parsed.is_discarded())
        continue;
      EXPECT_EQ(json::parse(parsed.dump()), parsed);
      EXPECT_EQ(parsed.dump(), json::parse(parsed.dump()).dump());
    }
  }
}

TEST(Protocol, AnalyzesFilesByPathAndFormat) {
  ProtocolSession s;
  json r = s.handle(json{{"type", "file-analysis"}, {"id", 1}, {"path", "file://" + kFixtures + "/analysis.ipynb"}});
  EXPECT_EQ(r["type"], "file-analysis-response");
  EXPECT_EQ(r["id"], 1);
  EXPECT_EQ(r["format"], "ipynb");
  json q = s.handle(json::parse(R"({"type":"query","id":"q","queries":[{"type":"resolve-value","criteria":["1@ages"]}]})"));
  EXPECT_EQ(q["results"]["resolve-value"]["results"][0]["value"], "[20L, 42L]");
  json fix = s.handle(json::parse(R"({"type":"apply-fix","id":"f","index":0})"));
  EXPECT_EQ(fix["type"], "error");

  json bad = s.handle(json{{"type", "file-analysis"}, {"id", 2}, {"content", "x <- ("}});
  EXPECT_EQ(bad["type"], "error");
  EXPECT_EQ(bad["id"], 2);
  // The failed build left the notebook analysis in place.
  EXPECT_EQ(s.analysis()->format(), DocumentFormat::Ipynb);
  json fmt = s.handle(json{{"type", "file-analysis"}, {"id", 3}, {"content", "x"}, {"format", "docx"}});
  EXPECT_EQ(fmt["message"], "unknown format \"docx\"");
}

TEST(Protocol, LintRuleFilterKeepsIndices) {
  ProtocolSession s;
  s.handle(json{{"type", "file-analysis"}, {"id", 1}, {"content", "a <- runif(1)\nb <- 2\nprint(a)"}});
  json r = s.handle(json{{"type", "lint"}, {"id", 2}, {"rules", {"unused-definition"}}});
  ASSERT_EQ(r["diagnostics"].size(), 1u);
  EXPECT_EQ(r["diagnostics"][0]["index"], 1);
  json fix = s.handle(json{{"type", "apply-fix"}, {"id", 3}, {"index", 1}});
  EXPECT_EQ(fix["content"], "a <- runif(1)\nprint(a)");
}

TEST(Protocol, ResponsesPairWithRequestIds) {
  ProtocolSession s;
  s.handle(json{{"type", "file-analysis"}, {"id", "a"}, {"content", "x <- 1\ny <- x"}});
  for (int i = 0; i < 20; ++i) {
    json id = i % 2 ? json(i) : json("r" + std::to_string(i));
    json req = i % 3 == 0 ? json{{"type", "lint"}, {"id", id}}
                          : json{{"type", "slice"}, {"id", id}, {"criteria", {"2@y"}}};
    EXPECT_EQ(s.handle(req)["id"], id);
  }
}
