#include "rflow/project.hpp"

#include "rflow/ast.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <queue>
#include <regex>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace rflow {

std::string_view format_name(DocumentFormat f) {
  switch (f) {
  case DocumentFormat::R: return "r";
  case DocumentFormat::Rmd: return "rmd";
  case DocumentFormat::Qmd: return "qmd";
  case DocumentFormat::Ipynb: return "ipynb";
  }
  return "r";
}

std::optional<DocumentFormat> parse_format(std::string_view name) {
  for (auto f : {DocumentFormat::R, DocumentFormat::Rmd, DocumentFormat::Qmd, DocumentFormat::Ipynb})
    if (format_name(f) == name)
      return f;
  return std::nullopt;
}

std::string strip_file_scheme(const std::string &path) {
  return path.rfind("file://", 0) == 0 ? path.substr(7) : path;
}

AnalysisRequest AnalysisRequest::file(std::string path, DocumentFormat format) {
  return {Kind::File, strip_file_scheme(path), {}, format};
}

AnalysisRequest AnalysisRequest::text(std::string content, DocumentFormat format) {
  return {Kind::Text, {}, std::move(content), format};
}

// ---- CellMap ----

CellMap CellMap::identity(int lines) { return CellMap({Cell{0, 1, lines, 1, lines}}); }

bool CellMap::covers(int line) const {
  return std::any_of(cells_.begin(), cells_.end(), [&](const Cell &c) {
    return c.extracted_first <= line && line <= c.extracted_last;
  });
}

MappedLocation CellMap::map_location(Position p) const {
  for (const Cell &c : cells_)
    if (c.extracted_first <= p.line && p.line <= c.extracted_last)
      return {c.index, {c.original_first + (p.line - c.extracted_first), p.col}};
  throw ProjectError("line " + std::to_string(p.line) + " is not part of any cell");
}

// ---- extraction ----

namespace {

std::vector<std::string> split_lines(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    out.push_back(line);
  }
  return out;
}

struct Builder {
  std::string text;
  std::vector<Cell> cells;
  int next_line = 1;

  // `original_first` is the original line of the body's first line.
  void add(int index, int original_first, const std::vector<std::string> &body) {
    if (!cells.empty() && !body.empty() && next_line > 1) {
      text += "\n";
      ++next_line;
    }
    Cell c{index, original_first, original_first + static_cast<int>(body.size()) - 1, next_line,
           next_line + static_cast<int>(body.size()) - 1};
    for (const auto &l : body)
      text += l + "\n";
    next_line += static_cast<int>(body.size());
    cells.push_back(c);
  }
};

ExtractedDocument extract_fenced(const SourceText &doc) {
  static const std::regex open(R"(^\s*(`{3,})\s*\{\s*([A-Za-z0-9_.-]*)[^}]*\}\s*$)");
  auto lines = split_lines(doc.content());
  Builder b;
  int index = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::smatch m;
    std::string fence;
    bool is_cell = std::regex_match(lines[i], m, open);
    if (is_cell) {
      fence = m[1];
    } else {
      // A plain fenced block is not a cell, but its contents must be skipped.
      auto first = lines[i].find_first_not_of(" \t");
      if (first == std::string::npos || lines[i].compare(first, 3, "```") != 0)
        continue;
      fence = lines[i].substr(first, lines[i].find_first_not_of('`', first) - first);
    }
    std::string lang = is_cell ? std::string(m[2]) : "";
    std::size_t start = i;
    std::vector<std::string> body;
    bool closed = false;
    for (++i; i < lines.size(); ++i) {
      auto b0 = lines[i].find_first_not_of(" \t");
      auto e0 = lines[i].find_last_not_of(" \t");
      if (b0 != std::string::npos && lines[i][b0] == '`' &&
          lines[i].substr(b0, e0 - b0 + 1).find_first_not_of('`') == std::string::npos &&
          e0 - b0 + 1 >= fence.size()) {
        closed = true;
        break;
      }
      body.push_back(lines[i]);
    }
    if (!closed)
      throw ProjectError(doc.origin() + ":" + std::to_string(start + 1) +
                         ": unterminated code block");
    if (!is_cell)
      continue;
    if (lang == "r" || lang == "R")
      b.add(index, static_cast<int>(start) + 2, body);
    ++index;
  }
  return {SourceText(doc.origin(), b.text), CellMap(std::move(b.cells))};
}

bool is_r(const std::string &lang) { return lang == "r" || lang == "R"; }

ExtractedDocument extract_notebook(const SourceText &doc) {
  json nb;
  try {
    nb = json::parse(doc.content());
  } catch (const json::parse_error &e) {
    // nlohmann reports a byte offset.
    Position p = doc.position_of(std::min<std::size_t>(e.byte ? e.byte - 1 : 0,
                                                      doc.content().size()));
    throw ProjectError(doc.origin() + ":" + to_string(p) + ": malformed notebook JSON");
  }
  if (!nb.is_object() || !nb.contains("cells") || !nb["cells"].is_array())
    throw ProjectError(doc.origin() + ":1:1: notebook has no \"cells\" array");

  std::optional<std::string> notebook_lang;
  if (auto meta = nb.find("metadata"); meta != nb.end() && meta->is_object()) {
    if (auto ks = meta->find("kernelspec"); ks != meta->end() && ks->contains("language"))
      notebook_lang = (*ks)["language"].get<std::string>();
    else if (auto li = meta->find("language_info"); li != meta->end() && li->contains("name"))
      notebook_lang = (*li)["name"].get<std::string>();
  }

  Builder b;
  int index = 0;
  for (const json &cell : nb["cells"]) {
    int this_index = index++;
    if (cell.value("cell_type", "") != "code")
      continue;
    std::optional<std::string> lang = notebook_lang;
    if (auto meta = cell.find("metadata"); meta != cell.end() && meta->is_object()) {
      if (auto vs = meta->find("vscode"); vs != meta->end() && vs->contains("languageId"))
        lang = (*vs)["languageId"].get<std::string>();
      else if (meta->contains("language"))
        lang = (*meta)["language"].get<std::string>();
    }
    if (lang && !is_r(*lang))
      continue;
    std::string source;
    const json &src = cell.contains("source") ? cell["source"] : json("");
    if (src.is_array())
      for (const auto &piece : src)
        source += piece.get<std::string>();
    else if (src.is_string())
      source = src.get<std::string>();
    b.add(this_index, 1, split_lines(source));
  }
  return {SourceText(doc.origin(), b.text), CellMap(std::move(b.cells))};
}

std::string lower_extension(const std::string &path) {
  std::string ext = fs::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

} // namespace

ExtractedDocument extract_r_cells(const SourceText &document, DocumentFormat format) {
  switch (format) {
  case DocumentFormat::Rmd:
  case DocumentFormat::Qmd: return extract_fenced(document);
  case DocumentFormat::Ipynb: return extract_notebook(document);
  case DocumentFormat::R: break;
  }
  return {document, CellMap::identity(static_cast<int>(document.line_count()))};
}

// ---- plugins ----

PluginRegistry PluginRegistry::defaults() {
  PluginRegistry r;
  auto using_format = [](DocumentFormat f) {
    return [f](const SourceText &doc) { return extract_r_cells(doc, f); };
  };
  r.add({"r", {".r"}, DocumentFormat::R, using_format(DocumentFormat::R)});
  r.add({"rmarkdown", {".rmd"}, DocumentFormat::Rmd, using_format(DocumentFormat::Rmd)});
  r.add({"quarto", {".qmd"}, DocumentFormat::Qmd, using_format(DocumentFormat::Qmd)});
  r.add({"jupyter", {".ipynb"}, DocumentFormat::Ipynb, using_format(DocumentFormat::Ipynb)});
  return r;
}

void PluginRegistry::add(FilePlugin plugin) {
  for (const auto &ext : plugin.extensions)
    for (const auto &p : plugins_)
      if (std::find(p.extensions.begin(), p.extensions.end(), ext) != p.extensions.end())
        throw ProjectError("extension " + ext + " is already handled by plugin " + p.name);
  plugins_.push_back(std::move(plugin));
}

const FilePlugin *PluginRegistry::for_path(const std::string &path) const {
  std::string ext = lower_extension(path);
  for (const auto &p : plugins_)
    if (std::find(p.extensions.begin(), p.extensions.end(), ext) != p.extensions.end())
      return &p;
  return nullptr;
}

ExtractedDocument load_request(const AnalysisRequest &request, const PluginRegistry &plugins) {
  if (request.kind == AnalysisRequest::Kind::Text)
    return extract_r_cells(SourceText("<text>", request.content), request.format);
  std::ifstream in(request.path, std::ios::binary);
  if (!in)
    throw ProjectError("cannot read " + request.path);
  std::stringstream ss;
  ss << in.rdbuf();
  SourceText doc(request.path, ss.str());
  if (const FilePlugin *p = plugins.for_path(request.path))
    return p->extract(doc);
  return extract_r_cells(doc, request.format);
}

// ---- discovery ----

namespace {

// Relative paths of the string-literal source() calls in a document.
std::vector<std::string> sourced_paths(const ExtractedDocument &doc) {
  std::vector<std::string> out;
  try {
    NormalizedAst ast = parse_normalized(doc.source);
    for (const AstNode &n : ast.nodes()) {
      if (n.kind != NodeKind::FunctionCall || ast.call_name(n.id) != "source")
        continue;
      auto args = ast.call_arguments(n.id);
      if (args.empty())
        continue;
      auto v = ast.argument_value(args.front());
      if (v && ast[*v].kind == NodeKind::StringLit)
        out.push_back(ast[*v].lexeme);
    }
  } catch (const ParseError &) {
  }
  return out;
}

// Tarjan's strongly connected components.
struct Components {
  const std::vector<std::set<std::size_t>> &succ;
  std::vector<int> index, low, comp;
  std::vector<bool> on_stack;
  std::vector<std::size_t> stack;
  int counter = 0, comps = 0;

  explicit Components(const std::vector<std::set<std::size_t>> &s)
      : succ(s), index(s.size(), -1), low(s.size(), 0), comp(s.size(), -1),
        on_stack(s.size(), false) {
    for (std::size_t v = 0; v < s.size(); ++v)
      if (index[v] < 0)
        visit(v);
  }

  void visit(std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : succ[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = comps;
      } while (w != v);
      ++comps;
    }
  }
};

} // namespace

Discovery discover(const fs::path &root_in, const PluginRegistry &plugins) {
  fs::path root = strip_file_scheme(root_in.string());
  std::error_code ec;
  if (!fs::is_directory(root, ec))
    throw ProjectError("cannot read directory " + root.string());

  std::vector<std::string> files; // relative, generic form
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  if (ec)
    throw ProjectError("cannot read directory " + root.string() + ": " + ec.message());
  for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec)
      throw ProjectError("cannot read directory " + it->path().string() + ": " + ec.message());
    if (it->is_regular_file(ec) && plugins.for_path(it->path().string()))
      files.push_back(fs::relative(it->path(), root).generic_string());
  }
  std::sort(files.begin(), files.end());

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < files.size(); ++i)
    index[files[i]] = i;

  // Edge i -> j: file i sources file j, so j loads first.
  std::vector<std::set<std::size_t>> sources(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    AnalysisRequest req = AnalysisRequest::file((root / files[i]).string(),
                                                plugins.for_path(files[i])->format);
    ExtractedDocument doc;
    try {
      doc = load_request(req, plugins);
    } catch (const ProjectError &) {
      continue;
    }
    for (const std::string &ref : sourced_paths(doc)) {
      fs::path dir = fs::path(files[i]).parent_path();
      for (const fs::path &candidate : {dir / ref, fs::path(ref)}) {
        auto found = index.find(candidate.lexically_normal().generic_string());
        if (found != index.end()) {
          sources[i].insert(found->second);
          break;
        }
      }
    }
  }

  Components scc(sources);
  std::vector<std::vector<std::size_t>> members(scc.comps);
  for (std::size_t v = 0; v < files.size(); ++v)
    members[scc.comp[v]].push_back(v); // ascending, so lexicographic
  // Component a must precede b when something in b sources something in a.
  std::vector<std::set<int>> before(scc.comps);
  std::vector<int> pending(scc.comps, 0);
  for (std::size_t v = 0; v < files.size(); ++v)
    for (std::size_t w : sources[v])
      if (scc.comp[v] != scc.comp[w] && before[scc.comp[w]].insert(scc.comp[v]).second)
        ++pending[scc.comp[v]];

  Discovery out;
  auto first = [&](int c) { return members[c].front(); };
  auto later = [&](int a, int b) { return first(a) > first(b); };
  std::priority_queue<int, std::vector<int>, decltype(later)> ready(later);
  for (int c = 0; c < scc.comps; ++c)
    if (pending[c] == 0)
      ready.push(c);
  while (!ready.empty()) {
    int c = ready.top();
    ready.pop();
    bool cyclic = members[c].size() > 1 || sources[first(c)].count(first(c));
    if (cyclic) {
      std::vector<std::string> names;
      for (std::size_t v : members[c])
        names.push_back(files[v]);
      out.cycles.push_back(std::move(names));
    }
    for (std::size_t v : members[c])
      out.requests.push_back(
          AnalysisRequest::file((root / files[v]).string(), plugins.for_path(files[v])->format));
    for (int next : before[c])
      if (--pending[next] == 0)
        ready.push(next);
  }
  return out;
}

AnalysisContext ContextHooks::enrich(const AnalysisRequest &request) const {
  AnalysisContext ctx;
  for (const auto &e : enrichers_)
    e(request, ctx);
  return ctx;
}

} // namespace rflow
