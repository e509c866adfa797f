#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rflow {

enum class Tag {
  Assignment,
  Control,
  LibraryLoad,
  NamespaceLoad,
  FileRead,
  FileWrite,
  PlotCreate,
  PlotAddon,
  Rng,
  Seed,
  DfConstructor,
  DfVerb,
  PureUnknown,
};

std::string_view tag_name(Tag t);

/// What the analyses need to know about a built-in function.
struct Semantics {
  Tag tag = Tag::PureUnknown;
  /// File-read/write: position and accepted names of the path argument.
  int path_position = 0;
  std::vector<std::string> path_names{"file", "path", "con", "description", "filename"};
  /// DfVerb: the verb (`mutate`, `select`, `filter`, `left_join`, ...).
  std::string verb;
  /// Package that exports the function, if known (for library attribution).
  std::string package;
  /// PlotAddon: whether the addon only links when chained with `+` (ggplot style).
  bool via_plus = false;
  /// PlotCreate: base-graphics device (links sequential addons) vs. ggplot object.
  bool base_graphics = false;
};

/// Maps function names to semantics. Lookups are total: unknown names are PureUnknown.
/// Prefix patterns (e.g. `geom_`) apply when no exact entry exists.
class BuiltInRegistry {
public:
  /// Registry populated with the default categories.
  static BuiltInRegistry defaults();

  void set(std::string name, Semantics s) { exact_[std::move(name)] = std::move(s); }
  void set_prefix(std::string prefix, Semantics s) {
    prefixes_.emplace_back(std::move(prefix), std::move(s));
  }
  void erase(const std::string &name) { exact_.erase(name); }

  const Semantics &lookup(std::string_view name) const;
  Tag tag(std::string_view name) const { return lookup(name).tag; }
  bool has(std::string_view name, Tag t) const { return lookup(name).tag == t; }

  /// Every exact entry with the given tag, sorted by name.
  std::vector<std::string> names_with(Tag t) const;

private:
  std::map<std::string, Semantics, std::less<>> exact_;
  std::vector<std::pair<std::string, Semantics>> prefixes_;
};

} // namespace rflow
