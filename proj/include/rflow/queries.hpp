#pragma once

#include "rflow/analysis.hpp"
#include "rflow/linter.hpp"

#include <json.hpp>

namespace rflow {

struct LibraryUse {
  std::string name;
  /// `library`, `require` or `::`.
  std::string via;
  NodeId node = 0;
};

struct FileAccess {
  std::string function;
  /// Rendered abstract value of the path argument; ⊤ when unknown or absent.
  std::string path;
  NodeId node = 0;
};

struct Visualization {
  std::string function;
  NodeId node = 0;
  std::vector<NodeId> linked;
};

struct DependencyReport {
  std::vector<LibraryUse> libraries;
  std::vector<FileAccess> reads;
  std::vector<FileAccess> writes;
  std::vector<Visualization> visualizations;
  /// Plot addons that draw to no known figure.
  std::vector<NodeId> unlinked;
};

struct PlotLinks {
  std::map<NodeId, std::vector<NodeId>> linked;
  std::vector<NodeId> unlinked;
};

/// Links addon calls to the plot they draw on: `+` chains to their leftmost create call,
/// base graphics addons to the closest dominating base create call.
PlotLinks link_plot_addons(const Analysis &analysis);

DependencyReport dependencies(const Analysis &analysis);

/// Indented text tree with Libraries / Reads / Writes / Visualizations groups.
std::string render_tree(const DependencyReport &report, const Analysis &analysis);

nlohmann::json to_json(const Location &loc, bool with_cell);
nlohmann::json location_json(const Analysis &analysis, NodeId node);
nlohmann::json location_json(const Analysis &analysis, const Range &range);
nlohmann::json to_json(const DependencyReport &report, const Analysis &analysis);
nlohmann::json to_json(const Diagnostic &d, const Analysis &analysis);
nlohmann::json to_json(const LintReport &report, const Analysis &analysis);
nlohmann::json to_json(const SliceResult &slice);

struct QueryOptions {
  LintConfig lint;
  const Linter *linter = nullptr; // builtin when null
};

/// Answers each query of `queries` (a JSON array of `{"type": ...}` objects). Results are
/// keyed by type; a repeated type gets `type#2`, `type#3`, ... Unknown types and bad
/// criteria produce an `error` entry for that query only.
nlohmann::json run_query(const Analysis &analysis, const nlohmann::json &queries,
                         const QueryOptions &options = {});

} // namespace rflow
