#pragma once

#include "rflow/queries.hpp"

#include <json.hpp>

namespace rflow {

inline constexpr const char *kVersion = "0.1.0";
inline constexpr int kProtocolVersion = 1;

struct SessionOptions {
  std::optional<std::filesystem::path> root;
  LintConfig lint;
};

/// One client's view of the server: its current analysis and nothing else. Requests are
/// answered in order; a failing request leaves the previous analysis in place.
///
///   file-analysis {path | content, format?}   -> file-analysis-response {name, format, nodes, vertices, edges, diagnostics}
///   query {queries: [...]}                    -> query-response {results}
///   slice {criteria, direction?}              -> slice-response {direction, criteria, ids, lines, code}
///   lint {rules?}                             -> lint-response {diagnostics, rules}
///   apply-fix {index}                         -> apply-fix-response {title, content, diagnostics}
///
/// Anything else yields {"type": "error", "id"?, "message"}.
class ProtocolSession {
public:
  explicit ProtocolSession(SessionOptions options = {});

  static nlohmann::json hello();

  /// Parses one message; malformed JSON is answered with an error.
  nlohmann::json handle_text(std::string_view text);
  nlohmann::json handle(const nlohmann::json &message);

  const AnalysisPtr &analysis() const { return analysis_; }

private:
  SessionOptions options_;
  AnalysisPtr analysis_;
  LintReport lint_;

  nlohmann::json file_analysis(const nlohmann::json &m);
  nlohmann::json apply_fix(const nlohmann::json &m);
  void rebuild(const AnalysisRequest &request);
  const Analysis &current() const;
};

} // namespace rflow
