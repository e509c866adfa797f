#include "rflow/protocol.hpp"

using nlohmann::json;

namespace rflow {

namespace {

struct RequestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json error(const json *id, const std::string &message) {
  json e{{"type", "error"}, {"message", message}};
  if (id)
    e["id"] = *id;
  return e;
}

DocumentFormat format_of(const json &m, const std::string &path) {
  if (m.contains("format")) {
    if (auto f = parse_format(m["format"].get<std::string>()))
      return *f;
    throw RequestError("unknown format \"" + m["format"].get<std::string>() + "\"");
  }
  if (!path.empty())
    if (const FilePlugin *p = PluginRegistry::defaults().for_path(path))
      return p->format;
  return DocumentFormat::R;
}

} // namespace

ProtocolSession::ProtocolSession(SessionOptions options) : options_(std::move(options)) {}

json ProtocolSession::hello() {
  return {{"type", "hello"}, {"name", "rflow"}, {"version", kVersion}, {"protocol", kProtocolVersion}};
}

json ProtocolSession::handle_text(std::string_view text) {
  json m = json::parse(text, nullptr, false);
  if (m.is_discarded())
    return error(nullptr, "malformed message: not valid JSON");
  return handle(m);
}

const Analysis &ProtocolSession::current() const {
  if (!analysis_)
    throw RequestError("no analysis yet; send file-analysis first");
  return *analysis_;
}

void ProtocolSession::rebuild(const AnalysisRequest &request) {
  AnalysisOptions o;
  o.root = options_.root;
  AnalysisPtr next = Analysis::build(request, std::move(o));
  LintReport lint = Linter::builtin().lint(*next, options_.lint);
  analysis_ = std::move(next);
  lint_ = std::move(lint);
}

json ProtocolSession::file_analysis(const json &m) {
  AnalysisRequest req;
  if (m.contains("content")) {
    req = AnalysisRequest::text(m["content"].get<std::string>(), format_of(m, m.value("path", "")));
  } else if (m.contains("path")) {
    std::string path = strip_file_scheme(m["path"].get<std::string>());
    req = AnalysisRequest::file(path, format_of(m, path));
  } else {
    throw RequestError("file-analysis needs \"path\" or \"content\"");
  }
  rebuild(req);
  const Analysis &a = *analysis_;
  return {{"name", a.name()},
          {"format", format_name(a.format())},
          {"nodes", a.ast().size()},
          {"vertices", a.graph().vertex_count()},
          {"edges", a.graph().edge_count()},
          {"diagnostics", lint_.diagnostics.size()}};
}

json ProtocolSession::apply_fix(const json &m) {
  const Analysis &a = current();
  if (a.format() != DocumentFormat::R)
    throw RequestError("quick-fixes can only be applied to plain R documents");
  if (!m.contains("index") || !m["index"].is_number_integer())
    throw RequestError("apply-fix needs an integer \"index\"");
  auto index = m["index"].get<long long>();
  if (index < 0 || static_cast<std::size_t>(index) >= lint_.diagnostics.size())
    throw RequestError("no diagnostic with index " + std::to_string(index));
  const Diagnostic &d = lint_.diagnostics[index];
  if (!d.fix)
    throw RequestError("diagnostic " + std::to_string(index) + " has no quick-fix");
  std::string title = d.fix->title;
  SourceText fixed = apply_quickfix(a.document().source, *d.fix);
  rebuild(AnalysisRequest::text(fixed.content()));
  return {{"title", title}, {"content", fixed.content()}, {"diagnostics", lint_.diagnostics.size()}};
}

json ProtocolSession::handle(const json &m) {
  if (!m.is_object())
    return error(nullptr, "malformed message: expected a JSON object");
  const json *id = m.contains("id") ? &m["id"] : nullptr;
  if (!m.contains("type") || !m["type"].is_string())
    return error(id, "malformed message: missing \"type\"");
  std::string type = m["type"];
  if (!id)
    return error(nullptr, "malformed message: missing \"id\"");

  json body;
  try {
    if (type == "file-analysis") {
      body = file_analysis(m);
    } else if (type == "query") {
      if (!m.contains("queries"))
        throw RequestError("query needs \"queries\"");
      QueryOptions qo;
      qo.lint = options_.lint;
      body = {{"results", run_query(current(), m["queries"], qo)}};
    } else if (type == "slice") {
      const Analysis &a = current();
      auto criteria = m.at("criteria").get<std::vector<std::string>>();
      std::string dir = m.value("direction", "backward");
      if (dir == "backward")
        body = to_json(a.slicer().backward(criteria));
      else if (dir == "forward")
        body = to_json(a.slicer().forward(criteria));
      else
        throw RequestError("unknown slice direction \"" + dir + "\"");
    } else if (type == "lint") {
      const Analysis &a = current();
      LintReport r = lint_;
      if (m.contains("rules")) {
        auto keep = m["rules"].get<std::set<std::string>>();
        // Indices stay those of the full report so apply-fix can refer to them.
        json out = to_json(r, a);
        json kept = json::array();
        for (auto &d : out["diagnostics"])
          if (keep.count(d["rule"]))
            kept.push_back(d);
        out["diagnostics"] = kept;
        body = out;
      } else {
        body = to_json(r, a);
      }
    } else if (type == "apply-fix") {
      body = apply_fix(m);
    } else {
      return error(id, "unknown message type \"" + type + "\"");
    }
  } catch (const RequestError &e) {
    return error(id, e.what());
  } catch (const ParseError &e) {
    return error(id, std::string("parse error: ") + e.what());
  } catch (const ProjectError &e) {
    return error(id, e.what());
  } catch (const CriterionError &e) {
    return error(id, std::string("bad criterion: ") + e.what());
  } catch (const StaleFixError &e) {
    return error(id, std::string("stale quick-fix: ") + e.what());
  } catch (const json::exception &e) {
    return error(id, std::string("malformed message: ") + e.what());
  }
  body["type"] = type + "-response";
  body["id"] = *id;
  return body;
}

} // namespace rflow
