#include "rflow/registry.hpp"

namespace rflow {

std::string_view tag_name(Tag t) {
  switch (t) {
  case Tag::Assignment: return "assignment";
  case Tag::Control: return "control";
  case Tag::LibraryLoad: return "library-load";
  case Tag::NamespaceLoad: return "namespace-load";
  case Tag::FileRead: return "file-read";
  case Tag::FileWrite: return "file-write";
  case Tag::PlotCreate: return "plot-create";
  case Tag::PlotAddon: return "plot-addon";
  case Tag::Rng: return "rng";
  case Tag::Seed: return "seed";
  case Tag::DfConstructor: return "df-constructor";
  case Tag::DfVerb: return "df-verb";
  case Tag::PureUnknown: return "pure-unknown";
  }
  return "?";
}

namespace {

Semantics tagged(Tag t, std::string package = {}) {
  Semantics s;
  s.tag = t;
  s.package = std::move(package);
  return s;
}

} // namespace

BuiltInRegistry BuiltInRegistry::defaults() {
  BuiltInRegistry r;
  for (const char *op : {"<-", "<<-", "=", "->", "->>", "assign"})
    r.set(op, tagged(Tag::Assignment));
  for (const char *c : {"if", "while", "for", "repeat", "break", "next", "return", "{", "(",
                        "function", "stop", "invisible"})
    r.set(c, tagged(Tag::Control));
  for (const char *l : {"library", "require", "requireNamespace", "loadNamespace"})
    r.set(l, tagged(Tag::LibraryLoad));
  r.set("::", tagged(Tag::NamespaceLoad));
  r.set(":::", tagged(Tag::NamespaceLoad));

  for (const char *f : {"read.csv", "read.table", "read.delim", "readRDS", "readLines", "scan",
                        "source", "load"})
    r.set(f, tagged(Tag::FileRead));
  for (const char *f : {"read_csv", "read_tsv", "read_delim"})
    r.set(f, tagged(Tag::FileRead, "readr"));
  for (const char *f : {"pdf", "png",
                        "jpeg", "svg", "sink", "save"})
    r.set(f, tagged(Tag::FileWrite));
  {
    Semantics s = tagged(Tag::FileWrite, "ggplot2");
    s.path_names = {"filename", "file", "path"};
    r.set("ggsave", s);
  }
  {
    Semantics s = tagged(Tag::FileWrite);
    s.path_position = 1;
    r.set("write.csv", s);
    r.set("write.table", s);
    r.set("saveRDS", s);
    r.set("writeLines", s);
  }

  for (const char *p : {"plot", "hist", "boxplot", "barplot"}) {
    Semantics s = tagged(Tag::PlotCreate);
    s.base_graphics = true;
    r.set(p, s);
  }
  r.set("ggplot", tagged(Tag::PlotCreate, "ggplot2"));
  for (const char *a : {"abline", "lines", "points", "legend", "text", "title", "axis"})
    r.set(a, tagged(Tag::PlotAddon));
  for (const char *a : {"aes", "labs", "xlab", "ylab", "ggtitle"}) {
    Semantics s = tagged(Tag::PlotAddon, "ggplot2");
    s.via_plus = true;
    r.set(a, s);
  }
  for (const char *prefix : {"geom_", "stat_", "theme", "scale_", "coord_", "facet_"}) {
    Semantics s = tagged(Tag::PlotAddon, "ggplot2");
    s.via_plus = true;
    r.set_prefix(prefix, s);
  }

  for (const char *f : {"sample", "runif", "rnorm", "rbinom", "rpois", "rexp", "sample.int"})
    r.set(f, tagged(Tag::Rng));
  r.set("set.seed", tagged(Tag::Seed));

  r.set("data.frame", tagged(Tag::DfConstructor));
  r.set("tibble", tagged(Tag::DfConstructor, "tibble"));
  for (const char *v : {"mutate", "select", "filter", "left_join", "right_join", "inner_join",
                        "full_join", "arrange", "group_by", "summarise", "summarize", "rename",
                        "distinct", "filter_all", "filter_at", "filter_if", "mutate_all",
                        "mutate_at", "mutate_if", "summarise_all", "summarise_at",
                        "summarise_if"}) {
    Semantics s = tagged(Tag::DfVerb, "dplyr");
    s.verb = v;
    r.set(v, s);
  }
  return r;
}

const Semantics &BuiltInRegistry::lookup(std::string_view name) const {
  static const Semantics unknown{};
  if (auto it = exact_.find(name); it != exact_.end())
    return it->second;
  for (const auto &[prefix, s] : prefixes_)
    if (name.substr(0, prefix.size()) == prefix)
      return s;
  return unknown;
}

std::vector<std::string> BuiltInRegistry::names_with(Tag t) const {
  std::vector<std::string> out;
  for (const auto &[name, s] : exact_)
    if (s.tag == t)
      out.push_back(name);
  return out;
}

} // namespace rflow
