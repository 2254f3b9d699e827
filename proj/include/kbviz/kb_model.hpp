#pragma once

#include "kbviz/ast.hpp"
#include "kbviz/ast_json.hpp"
#include "kbviz/parser.hpp"

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kbviz {

enum class ConstraintKind { Hard, Soft };

inline const char* to_string(ConstraintKind k) { return k == ConstraintKind::Hard ? "hard" : "soft"; }

inline std::optional<ConstraintKind> constraint_kind_from(std::string_view s) {
  if (s == "hard") return ConstraintKind::Hard;
  if (s == "soft") return ConstraintKind::Soft;
  return std::nullopt;
}

/// Identity of one constraint rule. Knowledge bases may define the same
/// identifier with several rules; `ordinal` numbers them in source order.
struct ConstraintRef {
  ConstraintKind kind = ConstraintKind::Soft;
  std::string id;
  std::size_t ordinal = 0;

  auto operator<=>(const ConstraintRef&) const = default;
  bool operator==(const ConstraintRef&) const = default;

  std::string str() const {
    std::string s = std::string(to_string(kind)) + "/" + id;
    if (ordinal > 0) s += "#" + std::to_string(ordinal);
    return s;
  }
};

/// Parses "soft/bin_high" or "hard/enc_type_valid#1".
inline std::optional<ConstraintRef> parse_constraint_ref(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto kind = constraint_kind_from(text.substr(0, slash));
  if (!kind) return std::nullopt;
  std::string_view rest = text.substr(slash + 1);
  ConstraintRef ref{*kind, {}, 0};
  if (auto hash = rest.rfind('#'); hash != std::string_view::npos) {
    std::string_view num = rest.substr(hash + 1);
    if (num.empty() || num.size() > 9) return std::nullopt;
    for (char c : num)
      if (c < '0' || c > '9') return std::nullopt;
    ref.ordinal = std::stoul(std::string(num));
    rest = rest.substr(0, hash);
  }
  if (rest.empty()) return std::nullopt;
  ref.id = std::string(rest);
  return ref;
}

struct Constraint {
  ConstraintKind kind = ConstraintKind::Soft;
  std::string id;
  std::size_t ordinal = 0;
  std::vector<Term> head_extra_args;
  std::vector<BodyLiteral> body;
  std::optional<std::int64_t> weight;
  std::optional<std::string> doc;
  Span span;
  std::vector<std::string> hierarchy_path;
  std::string source;
  /// Set when some body literals were outside the supported subset and were
  /// dropped by the parser; `body` then holds only the supported part.
  std::optional<std::string> unsupported;

  ConstraintRef ref() const { return ConstraintRef{kind, id, ordinal}; }
};

struct HierarchyNode {
  std::string segment;
  std::vector<HierarchyNode> children;
  std::vector<ConstraintRef> constraint_ids;
  int depth = -1; // the synthetic root; its children are depth 0

  bool is_leaf() const { return children.empty(); }
};

struct HierarchyOptions {
  /// Merge a node that has one child and no constraints of its own into that
  /// child (`a` -> `b` becomes `a_b`). Off gives the plain prefix tree.
  bool collapse_chains = true;
};

struct ConstraintSet {
  std::vector<Constraint> constraints;
  std::map<ConstraintKind, HierarchyNode> hierarchy;
  std::vector<Diagnostic> diagnostics;
  std::size_t ignored_statements = 0;

  std::size_t count(ConstraintKind k) const {
    return static_cast<std::size_t>(std::count_if(
        constraints.begin(), constraints.end(), [&](const Constraint& c) { return c.kind == k; }));
  }

  const Constraint* find(const ConstraintRef& ref) const {
    for (const auto& c : constraints)
      if (c.kind == ref.kind && c.ordinal == ref.ordinal && c.id == ref.id) return &c;
    return nullptr;
  }

  const HierarchyNode& hierarchy_of(ConstraintKind k) const {
    static const HierarchyNode empty;
    auto it = hierarchy.find(k);
    return it == hierarchy.end() ? empty : it->second;
  }
};

namespace detail {

inline Diagnostic model_diagnostic(std::string code, std::string message, std::optional<Span> span = {}) {
  Diagnostic d;
  d.severity = Severity::Warning;
  d.code = std::move(code);
  d.message = std::move(message);
  if (span) d.span = *span;
  return d;
}

/// Strips the comment marker and a leading `@constraint` tag.
inline std::string comment_body(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && text[i] == '%') ++i;
  while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  std::string_view rest = text.substr(i);
  constexpr std::string_view tag = "@constraint";
  if (rest.substr(0, tag.size()) == tag) {
    rest.remove_prefix(tag.size());
    while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t')) rest.remove_prefix(1);
  }
  while (!rest.empty() && (rest.back() == ' ' || rest.back() == '\t')) rest.remove_suffix(1);
  return std::string(rest);
}

inline std::vector<std::string> split_identifier(std::string_view id) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    auto pos = id.find('_', start);
    parts.emplace_back(id.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

} // namespace detail

/// Turns `hard(...)`/`soft(...)`-headed rules into constraints. Recovered
/// rules (supported part of a statement with unsupported body literals) are
/// included and flagged. `source` is used to record each constraint's text;
/// when empty the canonical printed form is used instead.
inline ConstraintSet extract_constraints(const ParseResult& parsed, std::string_view source = {}) {
  ConstraintSet set;

  std::map<std::size_t, std::string> attached_by_line;
  for (const auto& s : parsed.program.statements)
    if (const auto* c = s.as<Comment>(); c && c->attached)
      attached_by_line[s.span.line] = detail::comment_body(c->text);

  struct Candidate {
    const Rule* rule;
    Span span;
    std::optional<std::string> unsupported;
  };
  std::vector<Candidate> candidates;
  for (const auto& s : parsed.program.statements) {
    if (const auto* r = s.as<Rule>()) candidates.push_back({r, s.span, std::nullopt});
    else if (!s.is<Comment>()) ++set.ignored_statements;
  }
  for (const auto& d : parsed.diagnostics)
    if (d.recovered) candidates.push_back({&*d.recovered, d.span, d.construct});
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.span.start < b.span.start; });

  std::map<std::pair<ConstraintKind, std::string>, std::size_t> ordinals;
  for (const auto& cand : candidates) {
    const Rule& rule = *cand.rule;
    auto kind = constraint_kind_from(rule.head.predicate);
    if (!kind) {
      ++set.ignored_statements;
      continue;
    }
    if (rule.head.args.empty() || rule.head.args[0].kind != Term::Kind::Constant) {
      set.diagnostics.push_back(detail::model_diagnostic(
          "malformed-constraint",
          std::string(to_string(*kind)) + " rule whose first head argument is not a constant identifier",
          cand.span));
      continue;
    }
    Constraint c;
    c.kind = *kind;
    c.id = rule.head.args[0].name;
    c.ordinal = ordinals[{c.kind, c.id}]++;
    c.head_extra_args.assign(rule.head.args.begin() + 1, rule.head.args.end());
    c.body = rule.body;
    c.span = cand.span;
    c.unsupported = cand.unsupported;
    if (!source.empty() && cand.span.end <= source.size())
      c.source = std::string(source.substr(cand.span.start, cand.span.size()));
    else
      c.source = to_string(rule);

    std::vector<std::string> doc_lines;
    for (std::size_t line = cand.span.line; line > 1;) {
      auto it = attached_by_line.find(--line);
      if (it == attached_by_line.end()) break;
      doc_lines.push_back(it->second);
    }
    if (!doc_lines.empty()) {
      std::string doc;
      for (auto it = doc_lines.rbegin(); it != doc_lines.rend(); ++it) {
        if (!doc.empty()) doc += '\n';
        doc += *it;
      }
      c.doc = std::move(doc);
    }
    set.constraints.push_back(std::move(c));
  }
  return set;
}

/// Program-only overload; nothing is recovered from diagnostics.
inline ConstraintSet extract_constraints(const Program& program) {
  ParseResult pr;
  pr.program = program;
  return extract_constraints(pr);
}

/// Attaches weights declared as `#const <id>_weight = <int>.` to the soft
/// constraints named `<id>`. Every mismatch becomes a diagnostic.
inline ConstraintSet extract_weights(const Program& weights_program, ConstraintSet set) {
  constexpr std::string_view suffix = "_weight";
  std::set<std::string> soft_ids;
  for (const auto& c : set.constraints)
    if (c.kind == ConstraintKind::Soft) soft_ids.insert(c.id);

  std::map<std::string, std::int64_t> assigned;
  for (const auto& s : weights_program.statements) {
    const auto* decl = s.as<ConstDecl>();
    if (!decl) continue;
    std::string_view name = decl->name;
    if (name.size() <= suffix.size() || name.substr(name.size() - suffix.size()) != suffix) continue;
    std::string id(name.substr(0, name.size() - suffix.size()));
    if (!soft_ids.count(id)) {
      set.diagnostics.push_back(detail::model_diagnostic(
          "unmatched-weight", "weight declaration '" + decl->name + "' has no soft constraint '" + id + "'",
          s.span));
      continue;
    }
    if (assigned.count(id)) {
      set.diagnostics.push_back(detail::model_diagnostic(
          "duplicate-weight", "soft constraint '" + id + "' already has a weight; '" + decl->name + "' ignored",
          s.span));
      continue;
    }
    if (decl->value < 0) {
      set.diagnostics.push_back(detail::model_diagnostic(
          "negative-weight", "weight of '" + id + "' is negative and was ignored", s.span));
      continue;
    }
    assigned[id] = decl->value;
  }
  for (auto& c : set.constraints) {
    if (c.kind != ConstraintKind::Soft) continue;
    if (auto it = assigned.find(c.id); it != assigned.end()) {
      c.weight = it->second;
    } else {
      c.weight.reset();
      set.diagnostics.push_back(detail::model_diagnostic(
          "missing-weight", "soft constraint '" + c.ref().str() + "' has no weight declaration", c.span));
    }
  }
  return set;
}

/// Plain-text fallback for weight files the parser cannot handle: picks up
/// every `#const <id>_weight = <int>.` line by pattern.
inline Program scan_weight_declarations(std::string_view text, std::string source_name = "<weights>") {
  static const std::regex pattern(R"(#const\s+([A-Za-z_][A-Za-z0-9_']*_weight)\s*=\s*(-?[0-9]+)\s*\.)");
  Program p;
  p.source_name = std::move(source_name);
  std::string owned(text);
  std::size_t line = 1, line_start = 0, scanned = 0;
  for (auto it = std::sregex_iterator(owned.begin(), owned.end(), pattern); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    auto start = static_cast<std::size_t>(m.position(0));
    for (; scanned < start; ++scanned)
      if (owned[scanned] == '\n') {
        ++line;
        line_start = scanned + 1;
      }
    std::int64_t value = 0;
    try {
      value = std::stoll(m[2].str());
    } catch (const std::out_of_range&) {
      continue;
    }
    Span span{start, start + static_cast<std::size_t>(m.length(0)), line, start - line_start + 1};
    p.statements.push_back(Statement{span, ConstDecl{m[1].str(), value}});
  }
  return p;
}

/// Parses a weights source, falling back to the pattern scanner when the
/// parser reports errors.
inline Program load_weights(std::string_view text, std::string source_name = "<weights>") {
  auto parsed = parse_program(text, source_name);
  if (parsed.ok()) return std::move(parsed.program);
  return scan_weight_declarations(text, std::move(source_name));
}

namespace detail {

struct TrieNode {
  std::map<std::string, TrieNode> children;
  std::vector<ConstraintRef> refs;
};

inline HierarchyNode freeze(std::string segment, TrieNode& t) {
  HierarchyNode n;
  n.segment = std::move(segment);
  n.constraint_ids = std::move(t.refs);
  for (auto& [seg, child] : t.children) n.children.push_back(freeze(seg, child));
  return n;
}

inline void collapse(HierarchyNode& n) {
  while (n.children.size() == 1 && n.constraint_ids.empty()) {
    HierarchyNode child = std::move(n.children.front());
    n.segment += "_" + child.segment;
    n.children = std::move(child.children);
    n.constraint_ids = std::move(child.constraint_ids);
  }
  for (auto& c : n.children) collapse(c);
}

inline void sort_children(HierarchyNode& n) {
  std::sort(n.children.begin(), n.children.end(),
            [](const HierarchyNode& a, const HierarchyNode& b) { return a.segment < b.segment; });
  for (auto& c : n.children) sort_children(c);
}

inline void assign_depths_and_paths(HierarchyNode& n, int depth, std::vector<std::string>& path,
                                    std::map<ConstraintRef, std::vector<std::string>>& paths) {
  n.depth = depth;
  for (const auto& r : n.constraint_ids) paths[r] = path;
  for (auto& c : n.children) {
    path.push_back(c.segment);
    assign_depths_and_paths(c, depth + 1, path, paths);
    path.pop_back();
  }
}

} // namespace detail

/// Builds one identifier tree per constraint kind by splitting ids at `_`.
inline ConstraintSet build_hierarchy(ConstraintSet set, HierarchyOptions options = {}) {
  set.hierarchy.clear();
  std::map<ConstraintRef, std::vector<std::string>> paths;
  for (ConstraintKind kind : {ConstraintKind::Hard, ConstraintKind::Soft}) {
    detail::TrieNode trie;
    for (const auto& c : set.constraints) {
      if (c.kind != kind) continue;
      detail::TrieNode* node = &trie;
      for (auto& seg : detail::split_identifier(c.id)) node = &node->children[seg];
      node->refs.push_back(c.ref());
    }
    HierarchyNode root = detail::freeze("", trie);
    if (options.collapse_chains)
      for (auto& child : root.children) detail::collapse(child);
    // collapsing can reorder siblings lexicographically (`a_b` vs `a`)
    detail::sort_children(root);
    std::vector<std::string> path;
    detail::assign_depths_and_paths(root, -1, path, paths);
    set.hierarchy[kind] = std::move(root);
  }
  for (auto& c : set.constraints) c.hierarchy_path = paths[c.ref()];
  return set;
}

/// Visits nodes depth-first, parents before children.
template <typename Fn> void for_each_node(const HierarchyNode& n, Fn&& fn) {
  fn(n);
  for (const auto& c : n.children) for_each_node(c, fn);
}

// ---- model JSON -------------------------------------------------------------

inline json hierarchy_to_json(const HierarchyNode& n) {
  json refs = json::array();
  for (const auto& r : n.constraint_ids) refs.push_back(r.str());
  json children = json::array();
  for (const auto& c : n.children) children.push_back(hierarchy_to_json(c));
  return json{{"segment", n.segment}, {"depth", n.depth}, {"constraints", std::move(refs)},
              {"children", std::move(children)}};
}

inline HierarchyNode hierarchy_from_json(const json& j) {
  HierarchyNode n;
  n.segment = detail::field(j, "segment").get<std::string>();
  n.depth = detail::field(j, "depth").get<int>();
  for (const auto& r : detail::field(j, "constraints")) {
    auto ref = parse_constraint_ref(r.get<std::string>());
    if (!ref) throw SchemaError("bad constraint ref '" + r.get<std::string>() + "'");
    n.constraint_ids.push_back(*ref);
  }
  for (const auto& c : detail::field(j, "children")) n.children.push_back(hierarchy_from_json(c));
  return n;
}

inline json constraint_to_json(const Constraint& c) {
  json extra = json::array();
  for (const auto& t : c.head_extra_args) extra.push_back(term_to_json(t));
  return json{{"ref", c.ref().str()},
              {"kind", to_string(c.kind)},
              {"id", c.id},
              {"ordinal", c.ordinal},
              {"span", span_to_json(c.span)},
              {"head_extra_args", std::move(extra)},
              {"body", body_to_json(c.body)},
              {"weight", c.weight ? json(*c.weight) : json(nullptr)},
              {"doc", c.doc ? json(*c.doc) : json(nullptr)},
              {"hierarchy_path", c.hierarchy_path},
              {"source", c.source},
              {"unsupported", c.unsupported ? json(*c.unsupported) : json(nullptr)}};
}

inline Constraint constraint_from_json(const json& j) {
  Constraint c;
  auto kind = constraint_kind_from(detail::field(j, "kind").get<std::string>());
  if (!kind) throw SchemaError("bad constraint kind");
  c.kind = *kind;
  c.id = detail::field(j, "id").get<std::string>();
  c.ordinal = detail::field(j, "ordinal").get<std::size_t>();
  c.span = span_from_json(detail::field(j, "span"));
  for (const auto& t : detail::field(j, "head_extra_args")) c.head_extra_args.push_back(term_from_json(t));
  c.body = body_from_json(detail::field(j, "body"));
  if (const auto& w = detail::field(j, "weight"); !w.is_null()) c.weight = w.get<std::int64_t>();
  if (const auto& d = detail::field(j, "doc"); !d.is_null()) c.doc = d.get<std::string>();
  c.hierarchy_path = detail::field(j, "hierarchy_path").get<std::vector<std::string>>();
  c.source = detail::field(j, "source").get<std::string>();
  if (const auto& u = detail::field(j, "unsupported"); !u.is_null()) c.unsupported = u.get<std::string>();
  return c;
}

/// `{constraints, hierarchy, diagnostics}`; constraints in source order,
/// hierarchy children lexicographic.
inline json model_to_json(const ConstraintSet& set) {
  json constraints = json::array();
  for (const auto& c : set.constraints) constraints.push_back(constraint_to_json(c));
  json hierarchy = json::object();
  hierarchy["soft"] = hierarchy_to_json(set.hierarchy_of(ConstraintKind::Soft));
  hierarchy["hard"] = hierarchy_to_json(set.hierarchy_of(ConstraintKind::Hard));
  json diags = json::array();
  for (const auto& d : set.diagnostics) diags.push_back(diagnostic_to_json(d));
  return json{{"constraints", std::move(constraints)},
              {"hierarchy", std::move(hierarchy)},
              {"diagnostics", std::move(diags)}};
}

inline ConstraintSet model_from_json(const json& j) {
  ConstraintSet set;
  for (const auto& c : detail::field(j, "constraints")) set.constraints.push_back(constraint_from_json(c));
  const auto& h = detail::field(j, "hierarchy");
  set.hierarchy[ConstraintKind::Soft] = hierarchy_from_json(detail::field(h, "soft"));
  set.hierarchy[ConstraintKind::Hard] = hierarchy_from_json(detail::field(h, "hard"));
  for (const auto& d : detail::field(j, "diagnostics")) {
    Diagnostic diag;
    diag.severity = d.value("severity", "warning") == "error" ? Severity::Error : Severity::Warning;
    diag.code = d.value("code", "");
    diag.message = d.value("message", "");
    if (d.contains("span")) diag.span = span_from_json(d.at("span"));
    diag.construct = d.value("construct", "");
    set.diagnostics.push_back(std::move(diag));
  }
  return set;
}

} // namespace kbviz
