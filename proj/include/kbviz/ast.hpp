#pragma once

#include "kbviz/diagnostic.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

namespace kbviz {

enum class ArithOp { Add, Sub, Mul, Div };
enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

inline const char* to_string(ArithOp op) {
  switch (op) {
  case ArithOp::Add: return "+";
  case ArithOp::Sub: return "-";
  case ArithOp::Mul: return "*";
  case ArithOp::Div: return "/";
  }
  return "?";
}

inline const char* to_string(CompareOp op) {
  switch (op) {
  case CompareOp::Eq: return "=";
  case CompareOp::Ne: return "!=";
  case CompareOp::Lt: return "<";
  case CompareOp::Le: return "<=";
  case CompareOp::Gt: return ">";
  case CompareOp::Ge: return ">=";
  }
  return "?";
}

inline std::optional<ArithOp> arith_op_from(std::string_view text) {
  if (text == "+") return ArithOp::Add;
  if (text == "-") return ArithOp::Sub;
  if (text == "*") return ArithOp::Mul;
  if (text == "/") return ArithOp::Div;
  return std::nullopt;
}

/// Accepts the ASP-Core-2 spellings plus the gringo aliases `==` and `<>`.
inline std::optional<CompareOp> compare_op_from(std::string_view text) {
  if (text == "=" || text == "==") return CompareOp::Eq;
  if (text == "!=" || text == "<>") return CompareOp::Ne;
  if (text == "<") return CompareOp::Lt;
  if (text == "<=") return CompareOp::Le;
  if (text == ">") return CompareOp::Gt;
  if (text == ">=") return CompareOp::Ge;
  return std::nullopt;
}

/// A term of the supported ASP subset. Arith and Negate only appear inside
/// comparison operands.
struct Term {
  enum class Kind { Variable, Constant, Integer, Anonymous, Function, Arith, Negate };

  Kind kind = Kind::Anonymous;
  std::string name;        // Variable, Constant, Function
  std::int64_t value = 0;  // Integer
  ArithOp op = ArithOp::Add;
  std::vector<Term> args;  // Function arguments, Arith {lhs, rhs}, Negate {operand}

  bool operator==(const Term&) const = default;

  static Term variable(std::string n) { return named(Kind::Variable, std::move(n)); }
  static Term constant(std::string n) { return named(Kind::Constant, std::move(n)); }
  static Term integer(std::int64_t v) {
    Term t = of(Kind::Integer);
    t.value = v;
    return t;
  }
  static Term anonymous() { return of(Kind::Anonymous); }
  static Term function(std::string n, std::vector<Term> a) {
    Term t = named(Kind::Function, std::move(n));
    t.args = std::move(a);
    return t;
  }
  static Term arith(ArithOp o, Term lhs, Term rhs) {
    Term t = of(Kind::Arith);
    t.op = o;
    t.args.push_back(std::move(lhs));
    t.args.push_back(std::move(rhs));
    return t;
  }
  static Term negate(Term operand) {
    Term t = of(Kind::Negate);
    t.args.push_back(std::move(operand));
    return t;
  }

  bool is_variable() const { return kind == Kind::Variable; }
  bool is_ground() const {
    if (kind == Kind::Variable || kind == Kind::Anonymous) return false;
    for (const auto& a : args)
      if (!a.is_ground()) return false;
    return true;
  }

private:
  static Term of(Kind k) {
    Term t;
    t.kind = k;
    return t;
  }
  static Term named(Kind k, std::string n) {
    Term t = of(k);
    t.name = std::move(n);
    return t;
  }
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  bool operator==(const Atom&) const = default;
  std::size_t arity() const { return args.size(); }
  bool is_ground() const {
    for (const auto& a : args)
      if (!a.is_ground()) return false;
    return true;
  }
};

struct PositiveLiteral {
  Atom atom;
  bool operator==(const PositiveLiteral&) const = default;
};

/// Negation as failure: `not atom`.
struct NegatedLiteral {
  Atom atom;
  bool operator==(const NegatedLiteral&) const = default;
};

struct ComparisonLiteral {
  Term left;
  CompareOp op = CompareOp::Eq;
  Term right;
  bool operator==(const ComparisonLiteral&) const = default;
};

using BodyLiteral = std::variant<PositiveLiteral, NegatedLiteral, ComparisonLiteral>;

/// Head predicate used for integrity constraints (`:- body.`).
inline constexpr const char* kConstraintHead = "__constraint";

struct Fact {
  Atom head;
  bool operator==(const Fact&) const = default;
};

struct Rule {
  Atom head;
  std::vector<BodyLiteral> body;
  bool operator==(const Rule&) const = default;
};

struct ConstDecl {
  std::string name;
  std::int64_t value = 0;
  bool operator==(const ConstDecl&) const = default;
};

struct Comment {
  std::string text;
  bool attached = false;
  bool operator==(const Comment&) const = default;
};

struct Statement {
  Span span;
  std::variant<Fact, Rule, ConstDecl, Comment> node;

  template <typename T> const T* as() const { return std::get_if<T>(&node); }
  template <typename T> bool is() const { return std::holds_alternative<T>(node); }
};

/// Equality of statement content, ignoring where it came from.
inline bool structurally_equal(const Statement& a, const Statement& b) {
  return a.node == b.node;
}

struct Program {
  std::string source_name;
  std::vector<Statement> statements;
};

inline bool structurally_equal(const Program& a, const Program& b) {
  if (a.statements.size() != b.statements.size()) return false;
  for (std::size_t i = 0; i < a.statements.size(); ++i)
    if (!structurally_equal(a.statements[i], b.statements[i])) return false;
  return true;
}

// ---- canonical printing ---------------------------------------------------

inline std::string to_string(const Term& t);

inline std::string to_string(const std::vector<Term>& args) {
  std::string out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i > 0) out += ',';
    out += to_string(args[i]);
  }
  return out;
}

inline std::string to_string(const Term& t) {
  auto operand = [](const Term& x) {
    return x.kind == Term::Kind::Arith ? "(" + to_string(x) + ")" : to_string(x);
  };
  switch (t.kind) {
  case Term::Kind::Variable:
  case Term::Kind::Constant: return t.name;
  case Term::Kind::Integer: return std::to_string(t.value);
  case Term::Kind::Anonymous: return "_";
  case Term::Kind::Function: return t.name + "(" + to_string(t.args) + ")";
  case Term::Kind::Arith:
    return operand(t.args[0]) + to_string(t.op) + operand(t.args[1]);
  case Term::Kind::Negate: {
    const Term& x = t.args[0];
    bool wrap = x.kind == Term::Kind::Arith || x.kind == Term::Kind::Negate ||
                (x.kind == Term::Kind::Integer && x.value < 0);
    return wrap ? "-(" + to_string(x) + ")" : "-" + to_string(x);
  }
  }
  return "?";
}

inline std::string to_string(const Atom& a) {
  if (a.args.empty()) return a.predicate;
  return a.predicate + "(" + to_string(a.args) + ")";
}

inline std::string to_string(const BodyLiteral& lit) {
  return std::visit(
      [](const auto& l) -> std::string {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, PositiveLiteral>) return to_string(l.atom);
        else if constexpr (std::is_same_v<L, NegatedLiteral>) return "not " + to_string(l.atom);
        else return to_string(l.left) + " " + to_string(l.op) + " " + to_string(l.right);
      },
      lit);
}

inline std::string to_string(const std::vector<BodyLiteral>& body) {
  std::string out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (i > 0) out += ", ";
    out += to_string(body[i]);
  }
  return out;
}

inline std::string to_string(const Rule& r) {
  if (r.head.predicate == kConstraintHead && r.head.args.empty())
    return ":- " + to_string(r.body) + ".";
  return to_string(r.head) + " :- " + to_string(r.body) + ".";
}

inline std::string to_string(const Statement& s) {
  return std::visit(
      [](const auto& n) -> std::string {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, Fact>) return to_string(n.head) + ".";
        else if constexpr (std::is_same_v<N, Rule>) return to_string(n);
        else if constexpr (std::is_same_v<N, ConstDecl>)
          return "#const " + n.name + " = " + std::to_string(n.value) + ".";
        else return n.text;
      },
      s.node);
}

/// Canonical source form. Free-standing comments are followed by a blank
/// line so that re-parsing reproduces the attachment flags.
inline std::string print_program(const Program& p) {
  std::string out;
  for (const auto& s : p.statements) {
    out += to_string(s);
    out += '\n';
    if (const auto* c = s.as<Comment>(); c && !c->attached) out += '\n';
  }
  return out;
}

// ---- variable helpers -----------------------------------------------------

/// Appends named variables in order of occurrence (duplicates kept).
inline void collect_variables(const Term& t, std::vector<std::string>& out) {
  if (t.kind == Term::Kind::Variable) out.push_back(t.name);
  for (const auto& a : t.args) collect_variables(a, out);
}

inline void collect_variables(const Atom& a, std::vector<std::string>& out) {
  for (const auto& t : a.args) collect_variables(t, out);
}

inline void collect_variables(const BodyLiteral& lit, std::vector<std::string>& out) {
  std::visit(
      [&](const auto& l) {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, ComparisonLiteral>) {
          collect_variables(l.left, out);
          collect_variables(l.right, out);
        } else {
          collect_variables(l.atom, out);
        }
      },
      lit);
}

inline std::set<std::string> body_variables(const std::vector<BodyLiteral>& body) {
  std::vector<std::string> all;
  for (const auto& lit : body) collect_variables(lit, all);
  return {all.begin(), all.end()};
}

} // namespace kbviz
