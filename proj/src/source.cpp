#include "rflow/source.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rflow {

namespace {

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

} // namespace

std::string to_string(const Position &p) {
  return std::to_string(p.line) + ":" + std::to_string(p.col);
}

std::string to_string(const Range &r) { return to_string(r.start) + "-" + to_string(r.end); }

SourceText::SourceText(std::string origin, std::string content)
    : origin_(std::move(origin)), content_(std::move(content)) {
  line_starts_.push_back(0);
  for (std::size_t i = 0; i < content_.size(); ++i) {
    if (content_[i] == '\n')
      line_starts_.push_back(i + 1);
  }
}

SourceText SourceText::from_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return SourceText(path, buf.str());
}

std::string_view SourceText::line(int line) const {
  if (line < 1 || static_cast<std::size_t>(line) > line_starts_.size())
    return {};
  std::size_t begin = line_starts_[line - 1];
  std::size_t end = static_cast<std::size_t>(line) < line_starts_.size() ? line_starts_[line] - 1
                                                                         : content_.size();
  std::string_view text(content_.data() + begin, end - begin);
  if (!text.empty() && text.back() == '\r')
    text.remove_suffix(1);
  return text;
}

std::size_t SourceText::offset_of(Position p) const {
  if (p.line < 1 || static_cast<std::size_t>(p.line) > line_starts_.size() || p.col < 1)
    throw std::out_of_range("position out of range: " + to_string(p));
  std::size_t off = line_starts_[p.line - 1];
  std::size_t line_end = static_cast<std::size_t>(p.line) < line_starts_.size()
                             ? line_starts_[p.line] - 1
                             : content_.size();
  for (int col = 1; col < p.col; ++col) {
    if (off >= line_end)
      throw std::out_of_range("position out of range: " + to_string(p));
    ++off;
    while (off < line_end && is_continuation(static_cast<unsigned char>(content_[off])))
      ++off;
  }
  return off;
}

Position SourceText::position_of(std::size_t offset) const {
  if (offset > content_.size())
    throw std::out_of_range("offset out of range");
  std::size_t lo = 0, hi = line_starts_.size();
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (line_starts_[mid] <= offset)
      lo = mid;
    else
      hi = mid;
  }
  int col = 1;
  for (std::size_t i = line_starts_[lo]; i < offset; ++i) {
    if (!is_continuation(static_cast<unsigned char>(content_[i])))
      ++col;
  }
  return {static_cast<int>(lo) + 1, col};
}

std::string SourceText::text(const Range &r) const {
  std::size_t begin = offset_of(r.start);
  std::size_t end = offset_of({r.end.line, r.end.col + 1});
  return end > begin ? content_.substr(begin, end - begin) : std::string{};
}

bool SourceText::in_bounds(Position p) const {
  try {
    offset_of(p);
    return true;
  } catch (const std::out_of_range &) {
    return false;
  }
}

} // namespace rflow
