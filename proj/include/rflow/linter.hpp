#pragma once

#include "rflow/analysis.hpp"

#include <json.hpp>

#include <memory>
#include <stdexcept>

namespace rflow {

enum class Severity { Error, Warning, Info };
std::string_view severity_name(Severity s);
std::optional<Severity> parse_severity(std::string_view s);

enum class Certainty { Exact, Approximate };
std::string_view certainty_name(Certainty c);

/// Replaces the half-open range [start, end) with `text`; start == end inserts.
struct TextEdit {
  Position start;
  Position end;
  std::string text;
  bool operator==(const TextEdit &) const = default;
};

struct QuickFix {
  std::string title;
  std::vector<TextEdit> edits;
  bool operator==(const QuickFix &) const = default;
};

struct Diagnostic {
  std::string rule;
  Severity severity = Severity::Warning;
  /// In the coordinates of the analyzed code; see Analysis::locate for originals.
  Range range;
  std::string message;
  std::optional<QuickFix> fix;
  std::optional<Certainty> certainty;
};

/// Per-rule settings: `{"enabled": bool, "severity": "warning", ...rule options}`.
struct LintConfig {
  std::map<std::string, nlohmann::json> rules;

  static LintConfig from_json(const nlohmann::json &j);
  bool enabled(const std::string &rule) const;
  const nlohmann::json &settings(const std::string &rule) const;
};

struct LintContext {
  const Analysis &analysis;
  const nlohmann::json &settings;
  ValueResolver &resolver;
};

class LintRule {
public:
  virtual ~LintRule() = default;
  virtual std::string id() const = 0;
  virtual Severity default_severity() const = 0;
  /// Rules that need a project root are skipped without one.
  virtual bool needs_root() const { return false; }
  /// Appends diagnostics; `severity` is filled in by the linter.
  virtual void run(const LintContext &ctx, std::vector<Diagnostic> &out) const = 0;
};

struct RuleStatus {
  enum class State { Active, Disabled, Inactive };
  State state = State::Active;
  std::string reason;
};
std::string_view rule_state_name(RuleStatus::State s);

struct LintReport {
  /// Sorted by start location, then rule id.
  std::vector<Diagnostic> diagnostics;
  std::map<std::string, RuleStatus> status;
};

class Linter {
public:
  /// absolute-file-path, invalid-file-path, df-column-access, seed-randomness,
  /// unused-definition, deprecated-functions, dead-code, overwritten-definition.
  static Linter builtin();

  /// Throws std::invalid_argument on a duplicate id.
  void add(std::unique_ptr<LintRule> rule);
  std::vector<std::string> rule_ids() const;

  LintReport lint(const Analysis &analysis, const LintConfig &config = {}) const;

private:
  std::vector<std::shared_ptr<const LintRule>> rules_;
};

/// Path argument of a file read/write call, by name or position.
std::optional<NodeId> path_argument(const NormalizedAst &ast, NodeId call, const Semantics &s);

struct StaleFixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Applies the edits back to front. Throws StaleFixError when an edit is out of bounds,
/// edits overlap, or the result would not parse; the input is never modified.
SourceText apply_quickfix(const SourceText &source, const QuickFix &fix);

/// `file:line:col [severity] rule-id: message`, one per line, in original coordinates.
std::string render_text(const LintReport &report, const Analysis &analysis);

} // namespace rflow
