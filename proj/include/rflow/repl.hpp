#pragma once

#include "rflow/queries.hpp"

#include <filesystem>

namespace rflow {

struct ReplSettings {
  std::optional<std::filesystem::path> root;
  /// `file://` arguments resolve against this directory.
  std::filesystem::path cwd = std::filesystem::current_path();
};

struct ReplOutput {
  std::string text;
  bool quit = false;
};

/// Colon-command interpreter. Lines without a leading colon extend the session source;
/// commands without an argument run on that source.
class Repl {
public:
  explicit Repl(ReplSettings settings = {});

  static std::string banner();
  static constexpr const char *prompt = "R> ";

  ReplOutput eval(const std::string &line);

  const std::vector<std::string> &history() const { return history_; }
  const AnalysisPtr &current() const { return current_; }
  bool done() const { return done_; }

private:
  ReplSettings settings_;
  std::string source_;
  AnalysisPtr current_;
  std::vector<std::string> history_;
  bool done_ = false;

  AnalysisOptions options() const;
  /// Analysis of a command argument, or of the session source when `arg` is blank.
  AnalysisPtr target(const std::string &arg) const;
  std::string run(const std::string &command, const std::string &arg);
};

/// Reads lines from `in` until EOF or :quit, writing prompts and output to `out`.
void run_repl(std::istream &in, std::ostream &out, ReplSettings settings = {});

} // namespace rflow
