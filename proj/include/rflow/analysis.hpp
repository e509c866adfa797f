#pragma once

#include "rflow/abstractval.hpp"
#include "rflow/controlflow.hpp"
#include "rflow/dataflow.hpp"
#include "rflow/project.hpp"
#include "rflow/slicer.hpp"

#include <filesystem>
#include <memory>

namespace rflow {

struct AnalysisOptions {
  /// Project root; relative data and source() paths resolve against it.
  std::optional<std::filesystem::path> root;
  BuiltInRegistry registry = BuiltInRegistry::defaults();
  ShapeTransformers transformers = ShapeTransformers::defaults();
  int fuel = 2;
};

/// A source range in original document coordinates.
struct Location {
  std::string file;
  Range range;
  /// Notebook cell index; 0 for plain R files.
  int cell = 0;
};

/// Everything built for one document. Immutable after construction; share it through
/// std::shared_ptr<const Analysis>.
class Analysis {
public:
  /// Throws ProjectError when the document cannot be read or extracted and ParseError
  /// when the extracted code does not parse.
  static std::shared_ptr<const Analysis> build(const AnalysisRequest &request,
                                               AnalysisOptions options = {},
                                               const PluginRegistry &plugins =
                                                   PluginRegistry::defaults());
  static std::shared_ptr<const Analysis> from_text(std::string code, AnalysisOptions options = {});

  Analysis(const Analysis &) = delete;
  Analysis &operator=(const Analysis &) = delete;

  const AnalysisRequest &request() const { return request_; }
  /// File path, or `<text>` for text requests.
  const std::string &name() const { return name_; }
  /// Format the document was extracted as (from its plugin for files).
  DocumentFormat format() const { return format_; }
  const ExtractedDocument &document() const { return document_; }
  const NormalizedAst &ast() const { return ast_; }
  const DataflowResult &dataflow() const { return dataflow_; }
  const DataflowGraph &graph() const { return dataflow_.graph; }
  const Cfg &cfg() const { return cfg_; }
  const std::map<NodeId, Cfg> &function_cfgs() const { return function_cfgs_; }
  const AnalysisOptions &options() const { return options_; }
  const BuiltInRegistry &registry() const { return options_.registry; }
  const Slicer &slicer() const { return *slicer_; }

  /// Cfg whose statements contain `node`: the innermost function body, else top level.
  const Cfg &cfg_for(NodeId node) const;

  /// Fresh value resolver; each caller (thread) should use its own.
  std::unique_ptr<ValueResolver> resolver() const;
  /// Reads a data file relative to the root (or the document's directory).
  std::optional<std::string> read_data_file(const std::string &path) const;

  /// Location of a node, mapped back through the cell map.
  Location locate(NodeId node) const;
  Location locate(const Range &extracted) const;

private:
  Analysis(AnalysisRequest request, AnalysisOptions options, ExtractedDocument document,
           DocumentFormat format);

  std::optional<std::filesystem::path> resolve_path(const std::string &path) const;

  AnalysisRequest request_;
  AnalysisOptions options_;
  DocumentFormat format_;
  std::string name_;
  ExtractedDocument document_;
  NormalizedAst ast_;
  DataflowResult dataflow_;
  Cfg cfg_;
  std::map<NodeId, Cfg> function_cfgs_;
  std::unique_ptr<Slicer> slicer_;
};

using AnalysisPtr = std::shared_ptr<const Analysis>;

} // namespace rflow
