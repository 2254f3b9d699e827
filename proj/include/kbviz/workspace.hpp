#pragma once

#include "kbviz/eval.hpp"
#include "kbviz/hypergraph.hpp"
#include "kbviz/kb_model.hpp"
#include "kbviz/layout.hpp"
#include "kbviz/svg.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace kbviz {

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

/// Reads a whole file; CRLF line endings are normalized to LF.
inline std::string read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw IoError("cannot read '" + path.string() + "'");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i)
    if (!(text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n')) out += text[i];
  return out;
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

// ---- model ----------------------------------------------------------------------

struct InputFile {
  std::string role; // "kb" or "weights"
  std::string path;
  std::string sha256;
};

/// Parse, classify, attach weights and build the hierarchy. Parser
/// diagnostics are carried into the set's diagnostics.
inline ConstraintSet build_model(std::string_view kb_text, const std::string& kb_name,
                                 const std::optional<std::string>& weights_text = std::nullopt,
                                 const std::string& weights_name = "<weights>", HierarchyOptions options = {}) {
  auto parsed = parse_program(kb_text, kb_name);
  ConstraintSet set = extract_constraints(parsed, kb_text);
  std::vector<Diagnostic> diags;
  for (auto d : parsed.diagnostics) {
    d.recovered.reset();
    diags.push_back(std::move(d));
  }
  diags.insert(diags.end(), set.diagnostics.begin(), set.diagnostics.end());
  set.diagnostics = std::move(diags);
  if (weights_text) set = extract_weights(load_weights(*weights_text, weights_name), std::move(set));
  return build_hierarchy(std::move(set), options);
}

/// Distinct features shared by at least two constraints of the same kind.
inline std::size_t shared_feature_count(const ConstraintSet& set) {
  std::set<Feature> features;
  for (ConstraintKind kind : {ConstraintKind::Soft, ConstraintKind::Hard})
    for (const auto& f : build_hypergraph(set, kind, FeatureKinds{}, 2).features) features.insert(f.feature);
  return features.size();
}

inline json model_document(const ConstraintSet& set, const std::vector<InputFile>& inputs) {
  json in = json::array();
  for (const auto& f : inputs) in.push_back(json{{"role", f.role}, {"path", f.path}, {"sha256", f.sha256}});
  json doc{{"schema_version", kSchemaVersion},
           {"inputs", std::move(in)},
           {"summary", json{{"soft", set.count(ConstraintKind::Soft)},
                            {"hard", set.count(ConstraintKind::Hard)},
                            {"features", shared_feature_count(set)}}}};
  json body = model_to_json(set);
  for (auto& [key, value] : body.items()) doc[key] = value;
  return doc;
}

inline std::string summary_line(const ConstraintSet& set) {
  return "soft=" + std::to_string(set.count(ConstraintKind::Soft)) +
         " hard=" + std::to_string(set.count(ConstraintKind::Hard)) +
         " features=" + std::to_string(shared_feature_count(set));
}

/// Reads a model document written by model_document().
inline ConstraintSet load_model_document(const json& doc) {
  if (!doc.is_object()) throw SchemaError("model document must be an object");
  if (doc.value("schema_version", 0) != kSchemaVersion) throw SchemaError("unsupported model schema_version");
  return model_from_json(doc);
}

// ---- views ----------------------------------------------------------------------

struct ViewParams {
  ConstraintKind kind = ConstraintKind::Soft;
  FeatureKinds features;
  std::size_t min_degree = 2;

  auto tie() const { return std::make_tuple(kind, features.predicates, features.variables, min_degree); }
  bool operator<(const ViewParams& o) const { return tie() < o.tie(); }

  /// Builds params from the textual forms used by flags and query strings.
  /// Empty strings keep the defaults. Throws std::invalid_argument.
  static ViewParams parse(const std::string& type, const std::string& features, const std::string& min_degree) {
    ViewParams p;
    if (!type.empty()) {
      auto k = constraint_kind_from(type);
      if (!k) throw std::invalid_argument("type must be 'soft' or 'hard'");
      p.kind = *k;
    }
    if (!features.empty()) {
      p.features = FeatureKinds::parse(features);
      if (p.features.empty()) throw std::invalid_argument("no feature kind selected");
    }
    if (!min_degree.empty()) {
      if (min_degree.size() > 9 || min_degree.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("min_degree must be a positive integer");
      p.min_degree = std::stoul(min_degree);
      if (p.min_degree < 1) throw std::invalid_argument("min_degree must be a positive integer");
    }
    return p;
  }
};

inline Hypergraph hypergraph_for(const ConstraintSet& set, const ViewParams& p) {
  return build_hypergraph(set, p.kind, p.features, p.min_degree);
}

/// Layout of one view; a view without constraints gives an empty layout.
inline LayoutModel layout_for(const ConstraintSet& set, const ViewParams& p, const LayoutConfig& config = {}) {
  Hypergraph g = hypergraph_for(set, p);
  if (g.empty()) {
    config.validate();
    LayoutModel m;
    m.kind = p.kind;
    m.config = config;
    return m;
  }
  return compute_layout(g, set.hierarchy_of(p.kind), config);
}

// ---- specs ----------------------------------------------------------------------

/// Every `<name>.lp` file in `dir`, by file name.
inline std::vector<FactSet> load_spec_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
    if (entry.is_regular_file() && entry.path().extension() == ".lp") files.push_back(entry.path());
  if (ec) throw IoError("cannot list '" + dir.string() + "'");
  std::sort(files.begin(), files.end());
  std::vector<FactSet> out;
  for (const auto& f : files) out.push_back(load_fact_set(f.stem().string(), read_file(f)));
  return out;
}

inline std::vector<ViolationReport> evaluate_batch(const ConstraintSet& set, const std::vector<FactSet>& specs,
                                                   EvalOptions options = {}) {
  std::vector<ViolationReport> reports;
  for (const auto& s : specs) reports.push_back(evaluate_spec(set, s, options));
  return rank_specs(std::move(reports));
}

// ---- workspace ------------------------------------------------------------------

/// Immutable inputs plus derived artifacts shared by the HTTP service.
/// Layout and hypergraph documents are computed on demand and cached.
class Workspace {
public:
  /// From a knowledge base (and optional weights) on disk.
  static Workspace from_sources(const std::filesystem::path& kb, const std::optional<std::filesystem::path>& weights,
                                const std::optional<std::filesystem::path>& specs_dir) {
    std::string kb_text = read_file(kb);
    std::vector<InputFile> inputs{{"kb", kb.string(), sha256_hex(kb_text)}};
    std::optional<std::string> w;
    if (weights) {
      w = read_file(*weights);
      inputs.push_back({"weights", weights->string(), sha256_hex(*w)});
    }
    ConstraintSet set = build_model(kb_text, kb.string(), w, weights ? weights->string() : "<weights>");
    return Workspace(model_document(set, inputs), specs_dir);
  }

  /// From a model document written by `kbviz model`.
  static Workspace from_model(const std::filesystem::path& model, const std::optional<std::filesystem::path>& specs_dir) {
    json doc;
    try {
      doc = json::parse(read_file(model));
    } catch (const json::parse_error& e) {
      throw SchemaError(std::string("model is not valid JSON: ") + e.what());
    }
    return Workspace(std::move(doc), specs_dir);
  }

  Workspace(json model_doc, const std::optional<std::filesystem::path>& specs_dir)
      : model_doc_(std::move(model_doc)), set_(load_model_document(model_doc_)) {
    model_text_ = dump_json(model_doc_) + "\n";
    if (specs_dir) reports_ = evaluate_batch(set_, load_spec_dir(*specs_dir));
    reports_text_ = dump_json(reports_to_json(reports_)) + "\n";
  }

  Workspace(Workspace&& o) noexcept
      : model_doc_(std::move(o.model_doc_)), set_(std::move(o.set_)), model_text_(std::move(o.model_text_)),
        reports_(std::move(o.reports_)), reports_text_(std::move(o.reports_text_)) {}

  const ConstraintSet& set() const { return set_; }
  const std::string& model_text() const { return model_text_; }
  const std::vector<ViolationReport>& reports() const { return reports_; }
  const std::string& reports_text() const { return reports_text_; }

  std::string hypergraph_text(const ViewParams& p) const {
    return cached(hypergraph_cache_, p, [&] { return dump_json(hypergraph_to_json(hypergraph_for(set_, p))) + "\n"; });
  }
  std::string layout_text(const ViewParams& p) const {
    return cached(layout_cache_, p, [&] { return dump_json(layout_to_json(layout_for(set_, p))) + "\n"; });
  }
  std::string layout_svg(const ViewParams& p) const {
    return cached(svg_cache_, p, [&] { return render_svg(layout_for(set_, p)); });
  }

private:
  template <typename Fn>
  std::string cached(std::map<ViewParams, std::string>& cache, const ViewParams& p, Fn&& make) const {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (auto it = cache.find(p); it != cache.end()) return it->second;
    }
    std::string value = make();
    std::lock_guard<std::mutex> lock(mutex_);
    return cache.emplace(p, std::move(value)).first->second;
  }

  json model_doc_;
  ConstraintSet set_;
  std::string model_text_;
  std::vector<ViolationReport> reports_;
  std::string reports_text_;
  mutable std::mutex mutex_;
  mutable std::map<ViewParams, std::string> hypergraph_cache_, layout_cache_, svg_cache_;
};

// ---- commands -------------------------------------------------------------------

enum ExitCode { kExitOk = 0, kExitInvalid = 1, kExitIo = 2 };

namespace detail {
inline void emit(const std::optional<std::string>& out_path, const std::string& content, std::ostream& out) {
  if (out_path) write_file(*out_path, content);
  else out << content;
}

inline void print_diagnostic(std::ostream& err, const std::string& file, const Diagnostic& d) {
  err << file << ":" << d.span.line << ":" << d.span.col << ": " << to_string(d.severity) << ": " << d.message;
  if (!d.code.empty()) err << " [" << d.code << "]";
  err << "\n";
}
} // namespace detail

/// Writes the AST document. Exit 0 when only warnings were produced, 1 on
/// parse errors, 2 on I/O failure.
inline int cmd_parse(const std::string& kb_path, const std::optional<std::string>& out_path, std::ostream& out,
                     std::ostream& err) {
  try {
    std::string text = read_file(kb_path);
    auto parsed = parse_program(text, kb_path);
    json doc{{"schema_version", kSchemaVersion}};
    json body = ast_to_json(parsed.program);
    for (auto& [key, value] : body.items()) doc[key] = value;
    json diags = json::array();
    for (const auto& d : parsed.diagnostics) {
      diags.push_back(diagnostic_to_json(d));
      detail::print_diagnostic(err, kb_path, d);
    }
    doc["diagnostics"] = std::move(diags);
    detail::emit(out_path, dump_json(doc) + "\n", out);
    return parsed.ok() ? kExitOk : kExitInvalid;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

/// Writes the model document and prints `soft=<n> hard=<m> features=<k>`
/// (to `out` when writing to a file, otherwise to `err`).
inline int cmd_model(const std::string& kb_path, const std::optional<std::string>& weights_path,
                     const std::optional<std::string>& out_path, std::ostream& out, std::ostream& err) {
  try {
    std::string kb_text = read_file(kb_path);
    std::vector<InputFile> inputs{{"kb", kb_path, sha256_hex(kb_text)}};
    std::optional<std::string> w;
    if (weights_path) {
      w = read_file(*weights_path);
      inputs.push_back({"weights", *weights_path, sha256_hex(*w)});
    }
    ConstraintSet set = build_model(kb_text, kb_path, w, weights_path.value_or("<weights>"));
    for (const auto& d : set.diagnostics)
      if (d.severity == Severity::Error) detail::print_diagnostic(err, kb_path, d);
    detail::emit(out_path, dump_json(model_document(set, inputs)) + "\n", out);
    (out_path ? out : err) << summary_line(set) << "\n";
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

enum class LayoutFormat { Json, Svg };

inline int cmd_layout(const std::string& model_path, const ViewParams& params, LayoutFormat format,
                      const std::optional<std::string>& out_path, std::ostream& out, std::ostream& err) {
  try {
    Workspace ws = Workspace::from_model(model_path, std::nullopt);
    std::string content = format == LayoutFormat::Svg ? ws.layout_svg(params) : ws.layout_text(params);
    detail::emit(out_path, content, out);
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

inline int cmd_eval(const std::string& model_path, const std::string& specs_dir,
                    const std::optional<std::string>& out_path, std::ostream& out, std::ostream& err) {
  try {
    Workspace ws = Workspace::from_model(model_path, specs_dir);
    for (const auto& r : ws.reports())
      for (const auto& d : r.diagnostics)
        if (d.code == "missing-weight") err << r.spec_name << ": warning: " << d.message << "\n";
    detail::emit(out_path, ws.reports_text(), out);
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const FactSetError& e) {
    err << "error: " << e.what() << "\n";
    for (const auto& d : e.diagnostics()) err << "  " << d.span.line << ":" << d.span.col << ": " << d.message << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

} // namespace kbviz
