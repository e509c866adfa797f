#include "rflow/analysis.hpp"

#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace rflow {

namespace {

std::optional<std::string> slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

Analysis::Analysis(AnalysisRequest request, AnalysisOptions options, ExtractedDocument document,
                   DocumentFormat format)
    : request_(std::move(request)), options_(std::move(options)), format_(format),
      name_(request_.kind == AnalysisRequest::Kind::File ? request_.path : "<text>"),
      document_(std::move(document)), ast_(parse_normalized(document_.source)) {
  DataflowOptions df;
  df.load_source = [this](const std::string &path) -> std::optional<SourceText> {
    auto p = resolve_path(path);
    if (!p)
      return std::nullopt;
    auto text = slurp(*p);
    if (!text)
      return std::nullopt;
    return SourceText(p->string(), *text);
  };
  dataflow_ = build_dataflow(ast_, options_.registry, df);
  cfg_ = build_cfg(ast_);
  function_cfgs_ = build_function_cfgs(ast_);
  slicer_ = std::make_unique<Slicer>(ast_, dataflow_.graph, options_.registry);
}

AnalysisPtr Analysis::build(const AnalysisRequest &request, AnalysisOptions options,
                            const PluginRegistry &plugins) {
  ExtractedDocument doc = load_request(request, plugins);
  DocumentFormat format = request.format;
  if (request.kind == AnalysisRequest::Kind::File)
    if (const FilePlugin *p = plugins.for_path(request.path))
      format = p->format;
  return AnalysisPtr(new Analysis(request, std::move(options), std::move(doc), format));
}

AnalysisPtr Analysis::from_text(std::string code, AnalysisOptions options) {
  return build(AnalysisRequest::text(std::move(code)), std::move(options));
}

std::optional<fs::path> Analysis::resolve_path(const std::string &path) const {
  fs::path p(path);
  std::vector<fs::path> candidates;
  if (p.is_absolute()) {
    candidates.push_back(p);
  } else {
    if (request_.kind == AnalysisRequest::Kind::File)
      candidates.push_back(fs::path(request_.path).parent_path() / p);
    if (options_.root)
      candidates.push_back(*options_.root / p);
  }
  std::error_code ec;
  for (const auto &c : candidates)
    if (fs::is_regular_file(c, ec))
      return c;
  return std::nullopt;
}

std::optional<std::string> Analysis::read_data_file(const std::string &path) const {
  auto p = resolve_path(path);
  return p ? slurp(*p) : std::nullopt;
}

const Cfg &Analysis::cfg_for(NodeId node) const {
  for (std::optional<NodeId> p = ast_[node].parent; p; p = ast_[*p].parent)
    if (ast_[*p].kind == NodeKind::FunctionDefinition)
      return function_cfgs_.at(*p);
  return cfg_;
}

std::unique_ptr<ValueResolver> Analysis::resolver() const {
  ResolverOptions ro;
  ro.fuel = options_.fuel;
  ro.read_file = [this](const std::string &path) { return read_data_file(path); };
  return std::make_unique<ValueResolver>(ast_, dataflow_.graph, ro, options_.transformers);
}

Location Analysis::locate(const Range &r) const {
  auto map = [&](Position p, int &cell) {
    if (!document_.map.covers(p.line))
      return p;
    auto m = document_.map.map_location(p);
    cell = m.cell;
    return m.position;
  };
  Location loc{name_, r, 0};
  int end_cell = 0;
  loc.range.start = map(r.start, loc.cell);
  loc.range.end = map(r.end, end_cell);
  return loc;
}

Location Analysis::locate(NodeId node) const { return locate(ast_[node].range); }

} // namespace rflow
