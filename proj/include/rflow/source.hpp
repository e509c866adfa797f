#pragma once

#include <cstddef>
#include <compare>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace rflow {

/// 1-based line and column; columns count Unicode code points, not bytes.
struct Position {
  int line = 1;
  int col = 1;

  auto operator<=>(const Position &) const = default;
};

/// Inclusive source range. `end` points at the last character of the range.
struct Range {
  Position start;
  Position end;

  auto operator<=>(const Range &) const = default;

  bool contains(const Range &other) const { return start <= other.start && other.end <= end; }
};

std::string to_string(const Position &p);
std::string to_string(const Range &r);

/// Immutable UTF-8 text with an origin tag and a line index.
class SourceText {
public:
  SourceText() : SourceText("<text>", "") {}
  SourceText(std::string origin, std::string content);

  static SourceText from_file(const std::string &path);

  const std::string &origin() const { return origin_; }
  const std::string &content() const { return content_; }

  std::size_t line_count() const { return line_starts_.size(); }
  /// Text of a 1-based line without its terminator.
  std::string_view line(int line) const;

  /// Byte offset of a position; a position one past the end of a line is allowed.
  std::size_t offset_of(Position p) const;
  Position position_of(std::size_t offset) const;

  bool in_bounds(Position p) const;

  /// Text covered by an inclusive range.
  std::string text(const Range &r) const;

private:
  std::string origin_;
  std::string content_;
  std::vector<std::size_t> line_starts_;
};

using SourcePtr = std::shared_ptr<const SourceText>;

} // namespace rflow
