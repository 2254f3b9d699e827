#pragma once

#include "kbviz/ast.hpp"
#include "kbviz/parser.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace kbviz {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Serialises with insertion-ordered keys, no whitespace, and invalid UTF-8
/// replaced, so equal documents are byte-identical.
inline std::string dump_json(const json& j, int indent = -1) {
  return j.dump(indent, ' ', false, json::error_handler_t::replace);
}

// ---- writing ----------------------------------------------------------------

inline json span_to_json(const Span& s) {
  return json{{"start", s.start}, {"end", s.end}, {"line", s.line}, {"col", s.col}};
}

inline json term_to_json(const Term& t) {
  json j;
  switch (t.kind) {
  case Term::Kind::Variable:
    j = {{"kind", "variable"}, {"name", t.name}};
    break;
  case Term::Kind::Constant:
    j = {{"kind", "constant"}, {"name", t.name}};
    break;
  case Term::Kind::Integer:
    j = {{"kind", "integer"}, {"value", t.value}};
    break;
  case Term::Kind::Anonymous:
    j = {{"kind", "anonymous"}};
    break;
  case Term::Kind::Function: {
    json args = json::array();
    for (const auto& a : t.args) args.push_back(term_to_json(a));
    j = {{"kind", "function"}, {"name", t.name}, {"args", std::move(args)}};
    break;
  }
  case Term::Kind::Arith:
    j = {{"kind", "arith"}, {"op", to_string(t.op)},
         {"left", term_to_json(t.args[0])}, {"right", term_to_json(t.args[1])}};
    break;
  case Term::Kind::Negate:
    j = {{"kind", "negate"}, {"operand", term_to_json(t.args[0])}};
    break;
  }
  return j;
}

inline json atom_to_json(const Atom& a) {
  json args = json::array();
  for (const auto& t : a.args) args.push_back(term_to_json(t));
  return json{{"predicate", a.predicate}, {"args", std::move(args)}};
}

inline json literal_to_json(const BodyLiteral& lit) {
  return std::visit(
      [](const auto& l) -> json {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, PositiveLiteral>)
          return json{{"kind", "positive"}, {"atom", atom_to_json(l.atom)}};
        else if constexpr (std::is_same_v<L, NegatedLiteral>)
          return json{{"kind", "negated"}, {"atom", atom_to_json(l.atom)}};
        else
          return json{{"kind", "comparison"}, {"op", to_string(l.op)},
                      {"left", term_to_json(l.left)}, {"right", term_to_json(l.right)}};
      },
      lit);
}

inline json body_to_json(const std::vector<BodyLiteral>& body) {
  json out = json::array();
  for (const auto& lit : body) out.push_back(literal_to_json(lit));
  return out;
}

inline json statement_to_json(const Statement& s) {
  json j;
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, Fact>) {
          j["kind"] = "fact";
          j["span"] = span_to_json(s.span);
          j["head"] = atom_to_json(n.head);
        } else if constexpr (std::is_same_v<N, Rule>) {
          j["kind"] = "rule";
          j["span"] = span_to_json(s.span);
          j["head"] = atom_to_json(n.head);
          j["body"] = body_to_json(n.body);
        } else if constexpr (std::is_same_v<N, ConstDecl>) {
          j["kind"] = "const";
          j["span"] = span_to_json(s.span);
          j["name"] = n.name;
          j["value"] = n.value;
        } else {
          j["kind"] = "comment";
          j["span"] = span_to_json(s.span);
          j["text"] = n.text;
          j["attached"] = n.attached;
        }
      },
      s.node);
  return j;
}

inline json ast_to_json(const Program& p) {
  json stmts = json::array();
  for (const auto& s : p.statements) stmts.push_back(statement_to_json(s));
  return json{{"source", p.source_name}, {"statements", std::move(stmts)}};
}

inline std::string ast_to_text(const Program& p) { return dump_json(ast_to_json(p)); }

inline json diagnostic_to_json(const Diagnostic& d) {
  json j{{"severity", to_string(d.severity)}, {"code", d.code},
         {"span", span_to_json(d.span)}, {"message", d.message}};
  if (!d.construct.empty()) j["construct"] = d.construct;
  if (!d.expected.empty()) j["expected"] = d.expected;
  if (!d.found.empty()) j["found"] = d.found;
  return j;
}

// ---- reading ----------------------------------------------------------------

class SchemaError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw SchemaError(std::string("missing field '") + key + "'");
  return j.at(key);
}
} // namespace detail

inline Span span_from_json(const json& j) {
  return Span{detail::field(j, "start").get<std::size_t>(), detail::field(j, "end").get<std::size_t>(),
              detail::field(j, "line").get<std::size_t>(), detail::field(j, "col").get<std::size_t>()};
}

inline Term term_from_json(const json& j) {
  const auto kind = detail::field(j, "kind").get<std::string>();
  if (kind == "variable") return Term::variable(detail::field(j, "name").get<std::string>());
  if (kind == "constant") return Term::constant(detail::field(j, "name").get<std::string>());
  if (kind == "integer") return Term::integer(detail::field(j, "value").get<std::int64_t>());
  if (kind == "anonymous") return Term::anonymous();
  if (kind == "function") {
    std::vector<Term> args;
    for (const auto& a : detail::field(j, "args")) args.push_back(term_from_json(a));
    return Term::function(detail::field(j, "name").get<std::string>(), std::move(args));
  }
  if (kind == "arith") {
    auto op = arith_op_from(detail::field(j, "op").get<std::string>());
    if (!op) throw SchemaError("bad arithmetic operator");
    return Term::arith(*op, term_from_json(detail::field(j, "left")),
                       term_from_json(detail::field(j, "right")));
  }
  if (kind == "negate") return Term::negate(term_from_json(detail::field(j, "operand")));
  throw SchemaError("unknown term kind '" + kind + "'");
}

inline Atom atom_from_json(const json& j) {
  Atom a{detail::field(j, "predicate").get<std::string>(), {}};
  for (const auto& t : detail::field(j, "args")) a.args.push_back(term_from_json(t));
  return a;
}

inline BodyLiteral literal_from_json(const json& j) {
  const auto kind = detail::field(j, "kind").get<std::string>();
  if (kind == "positive") return PositiveLiteral{atom_from_json(detail::field(j, "atom"))};
  if (kind == "negated") return NegatedLiteral{atom_from_json(detail::field(j, "atom"))};
  if (kind == "comparison") {
    auto op = compare_op_from(detail::field(j, "op").get<std::string>());
    if (!op) throw SchemaError("bad comparison operator");
    return ComparisonLiteral{term_from_json(detail::field(j, "left")), *op,
                             term_from_json(detail::field(j, "right"))};
  }
  throw SchemaError("unknown literal kind '" + kind + "'");
}

inline std::vector<BodyLiteral> body_from_json(const json& j) {
  std::vector<BodyLiteral> body;
  for (const auto& lit : j) body.push_back(literal_from_json(lit));
  return body;
}

inline Statement statement_from_json(const json& j) {
  const auto kind = detail::field(j, "kind").get<std::string>();
  Statement s{span_from_json(detail::field(j, "span")), Fact{}};
  if (kind == "fact") s.node = Fact{atom_from_json(detail::field(j, "head"))};
  else if (kind == "rule")
    s.node = Rule{atom_from_json(detail::field(j, "head")), body_from_json(detail::field(j, "body"))};
  else if (kind == "const")
    s.node = ConstDecl{detail::field(j, "name").get<std::string>(),
                       detail::field(j, "value").get<std::int64_t>()};
  else if (kind == "comment")
    s.node = Comment{detail::field(j, "text").get<std::string>(),
                     detail::field(j, "attached").get<bool>()};
  else throw SchemaError("unknown statement kind '" + kind + "'");
  return s;
}

/// Inverse of ast_to_json(). Throws SchemaError (or a nlohmann type error)
/// on documents that do not follow the schema.
inline Program ast_from_json(const json& j) {
  Program p;
  p.source_name = detail::field(j, "source").get<std::string>();
  for (const auto& s : detail::field(j, "statements")) p.statements.push_back(statement_from_json(s));
  return p;
}

} // namespace kbviz
