// rflow: static analysis of R scripts and notebooks.
//
//   rflow                                  interactive REPL
//   rflow analyze <path> [--lint] [--slice <criterion>]... [--query <json>] [--format text|json]
//   rflow --server [--ws] [--port 1042] [--root <dir>]

#include "rflow/repl.hpp"
#include "rflow/server.hpp"

#include <CLI11.hpp>

#include <pthread.h>

#include <csignal>
#include <iostream>
#include <thread>

using namespace rflow;
using nlohmann::json;

namespace {

struct AnalyzeArgs {
  std::string path;
  bool lint = false;
  std::vector<std::string> slices;
  bool forward = false;
  std::string query;
  std::string format = "text";
};

int analyze(const AnalyzeArgs &args, const std::optional<std::filesystem::path> &root) {
  AnalysisOptions options;
  options.root = root;
  AnalysisPtr a;
  json query;
  if (!args.query.empty()) {
    query = json::parse(args.query, nullptr, false);
    if (query.is_discarded()) {
      std::cerr << "error: --query is not valid JSON\n";
      return 2;
    }
    if (query.is_object())
      query = json::array({query});
  }
  try {
    a = Analysis::build(AnalysisRequest::file(strip_file_scheme(args.path)), options);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  bool text = args.format == "text";
  json out{{"file", a->name()}};
  std::string report;
  try {
    DependencyReport deps = dependencies(*a);
    if (text)
      report += render_tree(deps, *a);
    else
      out["dependencies"] = to_json(deps, *a);

    if (args.lint) {
      LintReport lint = Linter::builtin().lint(*a);
      if (text)
        report += "\n" + (lint.diagnostics.empty() ? std::string("no problems found\n") : render_text(lint, *a));
      else
        out["lint"] = to_json(lint, *a);
    }
    if (!args.slices.empty()) {
      SliceResult s = args.forward ? a->slicer().forward(args.slices) : a->slicer().backward(args.slices);
      if (text)
        report += "\n" + s.text + (s.text.empty() || s.text.back() == '\n' ? "" : "\n");
      else
        out["slice"] = to_json(s);
    }
    if (!query.is_null()) {
      json r = run_query(*a, query);
      if (text)
        report += "\n" + r.dump(2) + "\n";
      else
        out["query"] = r;
    }
  } catch (const CriterionError &e) {
    std::cerr << "error: bad criterion: " << e.what() << '\n';
    return 1;
  }
  std::cout << (text ? report : out.dump(2) + "\n");
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Static dataflow analysis, slicing and linting for R"};
  app.set_version_flag("--version", std::string(kVersion));

  bool server = false, ws = false;
  int port = 1042;
  std::string root;
  app.add_flag("--server", server, "start the analysis server");
  app.add_flag("--ws", ws, "serve websockets instead of line-delimited TCP");
  app.add_option("--port", port, "server port")->check(CLI::Range(0, 65535));
  app.add_option("--root", root, "project root for relative paths");

  AnalyzeArgs args;
  CLI::App *cmd = app.add_subcommand("analyze", "analyze one file and print a report");
  cmd->add_option("path", args.path, "R script, R Markdown, Quarto or Jupyter file")->required();
  cmd->add_flag("--lint", args.lint, "run the linter");
  cmd->add_option("--slice", args.slices, "slicing criterion ($id, line:col or line@name)");
  cmd->add_flag("--forward", args.forward, "forward instead of backward slice");
  cmd->add_option("--query", args.query, "JSON query or query list");
  cmd->add_option("--format", args.format, "output format")->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (ws && !server) {
    std::cerr << "error: --ws requires --server\n";
    return 2;
  }

  std::optional<std::filesystem::path> root_path;
  if (!root.empty())
    root_path = std::filesystem::absolute(root);

  if (*cmd)
    return analyze(args, root_path);

  if (server) {
    ServerOptions o;
    o.transport = ws ? Transport::WebSocket : Transport::Tcp;
    o.address = "0.0.0.0";
    o.port = static_cast<unsigned short>(port);
    o.session.root = root_path;
    // Handle SIGINT/SIGTERM on a dedicated thread; every other thread inherits the mask.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);
    try {
      Server s(o);
      std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        s.stop();
      });
      std::cerr << "rflow " << kVersion << " listening on port " << s.port()
                << (ws ? " (websocket)" : " (tcp)") << std::endl;
      s.run();
      s.stop();
      pthread_kill(waiter.native_handle(), SIGTERM);
      waiter.join();
    } catch (const ServerError &e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
    return 0;
  }

  ReplSettings settings;
  settings.root = root_path;
  run_repl(std::cin, std::cout, settings);
  return 0;
}
