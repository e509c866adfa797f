#include "rflow/repl.hpp"
#include "rflow/protocol.hpp"

#include <iostream>
#include <sstream>

namespace rflow {

namespace {

struct Command {
  const char *name;
  const char *args;
  const char *help;
};

const Command kCommands[] = {
    {"help", "", "list the available commands"},
    {"quit", "", "end the session"},
    {"parse", "[code|file://path]", "print the parse tree"},
    {"normalize", "[code|file://path]", "print the normalized tree with node ids"},
    {"dataflow", "[code|file://path]", "print the dataflow graph as a mermaid diagram"},
    {"dataflowascii", "[code|file://path]", "print the dataflow vertices and edges"},
    {"cfg", "[code|file://path]", "print the control flow graph as a mermaid diagram"},
    {"slice", "[--forward] <criterion,...> [code|file://path]", "print a backward (or forward) slice"},
    {"lint", "[code|file://path]", "run the linting rules"},
    {"dependencies", "[code|file://path]", "print libraries, reads, writes and plots"},
    {"query", "<json> [code|file://path]", "run queries, e.g. [{\"type\":\"dependencies\"}]"},
    {"root", "[path]", "show or set the project root"},
};

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Splits `[...]` or `{...}` off the front of `s`.
std::pair<std::string, std::string> split_json(const std::string &s) {
  if (s.empty() || (s[0] != '[' && s[0] != '{'))
    throw std::invalid_argument("expected a JSON query list");
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == '\\')
        ++i;
      else if (c == '"')
        in_string = false;
    } else if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      ++depth;
    } else if ((c == ']' || c == '}') && --depth == 0) {
      return {s.substr(0, i + 1), trim(s.substr(i + 1))};
    }
  }
  throw std::invalid_argument("unterminated JSON query");
}

std::string first_word(std::string s, std::string &rest) {
  auto end = s.find_first_of(" \t");
  rest = end == std::string::npos ? "" : trim(s.substr(end));
  return s.substr(0, end);
}

} // namespace

Repl::Repl(ReplSettings settings) : settings_(std::move(settings)) {}

std::string Repl::banner() {
  return std::string("rflow repl v") + kVersion + "\nuse :help to get a list of available commands.\n";
}

AnalysisOptions Repl::options() const {
  AnalysisOptions o;
  o.root = settings_.root;
  return o;
}

AnalysisPtr Repl::target(const std::string &arg) const {
  if (arg.empty()) {
    if (!current_)
      throw std::invalid_argument("no code given and no session source yet");
    return current_;
  }
  if (arg.rfind("file://", 0) == 0) {
    std::filesystem::path p(strip_file_scheme(arg));
    if (p.is_relative())
      p = settings_.cwd / p;
    return Analysis::build(AnalysisRequest::file(p.lexically_normal().string()), options());
  }
  return Analysis::from_text(arg, options());
}

std::string Repl::run(const std::string &command, const std::string &arg) {
  if (command == "help") {
    std::ostringstream out;
    out << "Commands:\n";
    for (const Command &c : kCommands) {
      std::string usage = std::string(":") + c.name + (*c.args ? " " : "") + c.args;
      out << "  " << usage << std::string(usage.size() < 50 ? 50 - usage.size() : 1, ' ') << c.help
          << '\n';
    }
    out << "Lines without a leading colon are added to the session source.\n";
    return out.str();
  }
  if (command == "quit") {
    done_ = true;
    return {};
  }
  if (command == "root") {
    if (!arg.empty())
      settings_.root = std::filesystem::absolute(settings_.cwd / strip_file_scheme(arg)).lexically_normal();
    return settings_.root ? settings_.root->string() + "\n" : "no project root\n";
  }
  if (command == "parse") {
    AnalysisPtr a = target(arg);
    return dump(parse(a->document().source));
  }
  if (command == "normalize")
    return dump(target(arg)->ast());
  if (command == "dataflow")
    return render_mermaid(target(arg)->graph());
  if (command == "dataflowascii")
    return render_ascii(target(arg)->graph());
  if (command == "cfg") {
    AnalysisPtr a = target(arg);
    return render_mermaid(a->cfg(), a->ast());
  }
  if (command == "lint") {
    AnalysisPtr a = target(arg);
    std::string text = render_text(Linter::builtin().lint(*a), *a);
    return text.empty() ? "no problems found\n" : text;
  }
  if (command == "dependencies") {
    AnalysisPtr a = target(arg);
    return render_tree(dependencies(*a), *a);
  }
  if (command == "slice") {
    std::string rest;
    std::string word = first_word(arg, rest);
    bool forward = word == "--forward";
    if (forward)
      word = first_word(rest, rest);
    if (word.empty())
      throw std::invalid_argument("usage: :slice [--forward] <criterion,...> [code]");
    std::vector<std::string> criteria;
    std::stringstream ss(word);
    for (std::string c; std::getline(ss, c, ',');)
      if (!c.empty())
        criteria.push_back(c);
    AnalysisPtr a = target(rest);
    SliceResult r = forward ? a->slicer().forward(criteria) : a->slicer().backward(criteria);
    std::string text = r.text;
    if (!text.empty() && text.back() != '\n')
      text += '\n';
    return text;
  }
  if (command == "query") {
    auto [query, rest] = split_json(arg);
    nlohmann::json q = nlohmann::json::parse(query);
    if (q.is_object())
      q = nlohmann::json::array({q});
    AnalysisPtr a = target(rest);
    return run_query(*a, q).dump(2) + "\n";
  }
  return "unknown command, use :help\n";
}

ReplOutput Repl::eval(const std::string &raw) {
  std::string line = trim(raw);
  if (line.empty())
    return {};
  history_.push_back(line);
  try {
    if (line[0] != ':') {
      std::string next = source_.empty() ? line : source_ + "\n" + line;
      current_ = Analysis::from_text(next, options());
      source_ = std::move(next);
      return {};
    }
    std::string arg;
    std::string command = first_word(line.substr(1), arg);
    std::string text = run(command, arg);
    return {text, done_};
  } catch (const ParseError &e) {
    return {"error: parse error at " + std::string(e.what()) + "\n"};
  } catch (const std::exception &e) {
    return {std::string("error: ") + e.what() + "\n"};
  }
}

void run_repl(std::istream &in, std::ostream &out, ReplSettings settings) {
  Repl repl(std::move(settings));
  out << Repl::banner();
  std::string line;
  while (true) {
    out << Repl::prompt << std::flush;
    if (!std::getline(in, line))
      break;
    ReplOutput r = repl.eval(line);
    out << r.text << std::flush;
    if (r.quit)
      break;
  }
}

} // namespace rflow
