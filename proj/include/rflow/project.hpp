#pragma once

#include "rflow/source.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rflow {

struct ProjectError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DocumentFormat { R, Rmd, Qmd, Ipynb };

std::string_view format_name(DocumentFormat f);
std::optional<DocumentFormat> parse_format(std::string_view name);

/// Strips a leading `file://`.
std::string strip_file_scheme(const std::string &path);

struct AnalysisRequest {
  enum class Kind { File, Text };
  Kind kind = Kind::File;
  std::string path;    // File requests
  std::string content; // Text requests
  DocumentFormat format = DocumentFormat::R;

  static AnalysisRequest file(std::string path, DocumentFormat format = DocumentFormat::R);
  static AnalysisRequest text(std::string content, DocumentFormat format = DocumentFormat::R);
  bool operator==(const AnalysisRequest &) const = default;
};

/// One extracted cell. Line ranges are inclusive and 1-based; an empty cell has
/// `extracted_last < extracted_first`.
struct Cell {
  int index = 0;
  int original_first = 1;
  int original_last = 0;
  int extracted_first = 1;
  int extracted_last = 0;
  bool operator==(const Cell &) const = default;
};

struct MappedLocation {
  int cell = 0;
  Position position;
  bool operator==(const MappedLocation &) const = default;
};

class CellMap {
public:
  CellMap() = default;
  explicit CellMap(std::vector<Cell> cells) : cells_(std::move(cells)) {}

  /// Single cell covering `lines` lines unchanged.
  static CellMap identity(int lines);

  const std::vector<Cell> &cells() const { return cells_; }

  /// Original location of an extracted one; throws ProjectError for uncovered lines.
  MappedLocation map_location(Position extracted) const;
  bool covers(int extracted_line) const;

private:
  std::vector<Cell> cells_;
};

struct ExtractedDocument {
  SourceText source;
  CellMap map;
};

/// Extracts R code from a notebook. `.R` text is passed through as a single cell.
/// For ipynb, original lines count within the cell's source.
ExtractedDocument extract_r_cells(const SourceText &document, DocumentFormat format);

struct FilePlugin {
  std::string name;
  std::vector<std::string> extensions; // lower case, with the dot
  DocumentFormat format = DocumentFormat::R;
  std::function<ExtractedDocument(const SourceText &)> extract;
};

class PluginRegistry {
public:
  /// `.R`, `.Rmd`, `.qmd` and `.ipynb`.
  static PluginRegistry defaults();

  /// Throws ProjectError when an extension is already claimed.
  void add(FilePlugin plugin);
  const FilePlugin *for_path(const std::string &path) const;
  const std::vector<FilePlugin> &plugins() const { return plugins_; }

private:
  std::vector<FilePlugin> plugins_;
};

struct Discovery {
  std::vector<AnalysisRequest> requests;
  /// Groups of files that source each other in a cycle, each in lexicographic order.
  std::vector<std::vector<std::string>> cycles;
};

/// Claimed files under `root` in loading order: sourced files come before the files
/// that source them; ties go by path.
Discovery discover(const std::filesystem::path &root, const PluginRegistry &plugins);

/// Reads and extracts the document behind a request.
ExtractedDocument load_request(const AnalysisRequest &request, const PluginRegistry &plugins);

/// Key/value metadata attached to an analysis by context plugins.
using AnalysisContext = std::map<std::string, std::string>;
using ContextEnricher = std::function<void(const AnalysisRequest &, AnalysisContext &)>;

class ContextHooks {
public:
  void add(ContextEnricher e) { enrichers_.push_back(std::move(e)); }
  AnalysisContext enrich(const AnalysisRequest &request) const;

private:
  std::vector<ContextEnricher> enrichers_;
};

} // namespace rflow
