#pragma once

#include "kbviz/ast.hpp"
#include "kbviz/lexer.hpp"

#include <algorithm>
#include <charconv>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kbviz {

/// Something the parser reported instead of (or in addition to) producing a
/// statement. Unsupported constructs are warnings; lex and parse failures are
/// errors. When only some body literals of a rule were unsupported, the rest
/// of the rule is kept in `recovered`.
struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code; // "lex-error" | "parse-error" | "unsupported"
  Span span;
  std::string message;
  std::string construct;
  std::vector<std::string> expected;
  std::string found;
  std::optional<Rule> recovered;
};

struct ParseResult {
  Program program;
  std::vector<Diagnostic> diagnostics;

  std::size_t error_count() const {
    return static_cast<std::size_t>(std::count_if(
        diagnostics.begin(), diagnostics.end(),
        [](const Diagnostic& d) { return d.severity == Severity::Error; }));
  }
  std::size_t warning_count() const { return diagnostics.size() - error_count(); }
  bool ok() const { return error_count() == 0; }
};

namespace detail {

/// Thrown inside the parser when a construct outside the supported subset is
/// recognised. Never escapes parse_program().
struct Unsupported {
  Span span;
  std::string construct;
};

inline bool is_aggregate_directive(const Token& t) {
  return t.kind == TokenKind::Directive &&
         (t.text == "#count" || t.text == "#sum" || t.text == "#min" ||
          t.text == "#max");
}

class Parser {
public:
  Parser(std::vector<Token> tokens, std::size_t source_size) {
    for (auto& t : tokens) {
      if (t.kind == TokenKind::Comment) comments_.push_back(std::move(t));
      else toks_.push_back(std::move(t));
    }
    Span end{source_size, source_size, 1, 1};
    if (!toks_.empty()) {
      end = toks_.back().span;
      end.start = end.end;
    }
    eof_ = Token{TokenKind::Punctuation, "", end};
  }

  void run(ParseResult& result) {
    while (!at_end()) statement(result);
    for (const auto& c : comments_) {
      add_item(c.span, ItemKind::Comment);
      result.program.statements.push_back(Statement{c.span, Comment{c.text, false}});
    }
    std::stable_sort(result.program.statements.begin(), result.program.statements.end(),
                     [](const Statement& a, const Statement& b) {
                       return a.span.start < b.span.start;
                     });
    attach_comments(result.program);
  }

private:
  enum class ItemKind { Comment, Rule, Other };
  struct Item {
    std::size_t offset;
    std::size_t line;
    ItemKind kind;
  };

  // ---- token access ----

  bool at_end() const { return pos_ >= toks_.size(); }
  const Token& peek(std::size_t k = 0) const {
    return pos_ + k < toks_.size() ? toks_[pos_ + k] : eof_;
  }
  const Token& next() {
    const Token& t = peek();
    if (!at_end()) ++pos_;
    return t;
  }
  static std::string describe(const Token& t) {
    if (t.text.empty()) return "end of input";
    return std::string(to_string(t.kind)) + " '" + t.text + "'";
  }
  [[noreturn]] void fail(std::vector<std::string> expected) const {
    throw ParseError(peek().span, std::move(expected), describe(peek()));
  }
  void expect_punct(std::string_view p) {
    if (!peek().is_punct(p)) fail({"'" + std::string(p) + "'"});
    next();
  }
  Span span_from(std::size_t first) const {
    if (first >= toks_.size()) return eof_.span;
    std::size_t last = pos_ > first ? pos_ - 1 : first;
    return cover(toks_[first].span, toks_[std::min(last, toks_.size() - 1)].span);
  }
  std::int64_t integer_value(const Token& t) const {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size())
      throw ParseError(t.span, {"integer within 64-bit range"}, describe(t));
    return v;
  }

  // ---- statements ----

  void statement(ParseResult& result) {
    const std::size_t first = pos_;
    std::vector<Unsupported> skipped;
    try {
      auto node = statement_node(skipped);
      Span span = span_from(first);
      if (!skipped.empty()) {
        Diagnostic d = unsupported_diagnostic(span, skipped);
        d.recovered = std::get<Rule>(node);
        add_item(span, ItemKind::Rule);
        result.diagnostics.push_back(std::move(d));
        return;
      }
      add_item(span, std::holds_alternative<Rule>(node) ? ItemKind::Rule : ItemKind::Other);
      result.program.statements.push_back(Statement{span, std::move(node)});
    } catch (const Unsupported& u) {
      pos_ = first;
      skip_balanced({"."}, true);
      if (u.construct == "weak constraint" && !at_end() && peek().is_punct("[")) {
        next();
        skip_balanced({"]"}, true);
      }
      Span span = span_from(first);
      add_item(span, ItemKind::Other);
      result.diagnostics.push_back(unsupported_diagnostic(span, {u}));
    } catch (const ParseError& e) {
      std::size_t failed_at = pos_;
      pos_ = std::max(failed_at, first);
      while (!at_end() && !peek().is_punct(".")) next();
      if (!at_end()) next();
      if (pos_ == first) next();
      add_item(span_from(first), ItemKind::Other);
      Diagnostic d;
      d.severity = Severity::Error;
      d.code = "parse-error";
      d.span = e.span();
      d.message = e.what();
      d.expected = e.expected();
      d.found = e.found();
      result.diagnostics.push_back(std::move(d));
    }
  }

  static Diagnostic unsupported_diagnostic(Span span, const std::vector<Unsupported>& list) {
    std::vector<std::string> names;
    for (const auto& u : list)
      if (std::find(names.begin(), names.end(), u.construct) == names.end())
        names.push_back(u.construct);
    Diagnostic d;
    d.severity = Severity::Warning;
    d.code = "unsupported";
    d.span = span;
    for (std::size_t i = 0; i < names.size(); ++i)
      d.construct += (i ? ", " : "") + names[i];
    d.message = "unsupported " + d.construct + "; statement skipped";
    return d;
  }

  std::variant<Fact, Rule, ConstDecl, Comment> statement_node(std::vector<Unsupported>& skipped) {
    const Token& t = peek();
    if (t.is_punct(":-")) {
      next();
      Rule r{Atom{kConstraintHead, {}}, body(skipped)};
      expect_punct(".");
      return r;
    }
    if (t.is_punct(":~")) throw Unsupported{t.span, "weak constraint"};
    if (t.kind == TokenKind::Directive) {
      if (t.text == "#const") return const_decl();
      if (t.text == "#minimize" || t.text == "#maximize")
        throw Unsupported{t.span, "optimization directive"};
      if (is_aggregate_directive(t)) throw Unsupported{t.span, "aggregate"};
      throw Unsupported{t.span, "directive " + t.text};
    }
    if (t.is_punct("{") || (t.kind == TokenKind::Integer && peek(1).is_punct("{")))
      throw Unsupported{t.span, "choice rule"};
    if (t.is(TokenKind::Arithmetic, "-") && peek(1).kind == TokenKind::Identifier)
      throw Unsupported{t.span, "classical negation"};
    if (t.kind != TokenKind::Identifier || t.text == "not")
      fail({"identifier", "':-'", "directive"});

    Atom head = atom();
    const Token& after = peek();
    if (after.is_punct("|") || after.is_punct(";"))
      throw Unsupported{after.span, "disjunctive head"};
    if (after.is_punct(":")) throw Unsupported{after.span, "conditional literal"};
    if (after.is_punct(".")) {
      next();
      return Fact{std::move(head)};
    }
    if (after.is_punct(":-")) {
      next();
      Rule r{std::move(head), body(skipped)};
      expect_punct(".");
      return r;
    }
    fail({"'.'", "':-'"});
  }

  ConstDecl const_decl() {
    next(); // #const
    if (peek().kind != TokenKind::Identifier) fail({"identifier"});
    ConstDecl d{next().text, 0};
    if (!peek().is(TokenKind::Comparison, "=")) fail({"'='"});
    next();
    bool negative = false;
    if (peek().is(TokenKind::Arithmetic, "-")) {
      negative = true;
      next();
    }
    if (peek().kind == TokenKind::Identifier && !negative)
      throw Unsupported{peek().span, "symbolic constant value"};
    if (peek().kind != TokenKind::Integer) fail({"integer"});
    d.value = integer_value(next());
    if (negative) d.value = -d.value;
    expect_punct(".");
    return d;
  }

  // ---- bodies ----

  std::vector<BodyLiteral> body(std::vector<Unsupported>& skipped) {
    std::vector<BodyLiteral> lits;
    for (;;) {
      const std::size_t first = pos_;
      try {
        BodyLiteral lit = literal();
        const Token& t = peek();
        if (t.is_punct(":")) throw Unsupported{t.span, "conditional literal"};
        if (t.is_punct(";")) throw Unsupported{t.span, "disjunctive body"};
        lits.push_back(std::move(lit));
      } catch (const Unsupported& u) {
        pos_ = first;
        skip_balanced({",", "."}, false);
        if (pos_ == first) throw ParseError(peek().span, {"literal"}, describe(peek()));
        skipped.push_back(Unsupported{span_from(first), u.construct});
      }
      if (peek().is_punct(",")) {
        next();
        continue;
      }
      if (peek().is_punct(".")) break;
      fail({"','", "'.'"});
    }
    if (lits.empty() && skipped.empty()) fail({"literal"});
    return lits;
  }

  /// Advances to the first stop token at nesting depth 0. With `consume` the
  /// stop token is consumed as well.
  void skip_balanced(std::initializer_list<std::string_view> stops, bool consume) {
    int depth = 0;
    while (!at_end()) {
      const Token& t = peek();
      if (depth == 0 && t.kind == TokenKind::Punctuation &&
          std::find(stops.begin(), stops.end(), t.text) != stops.end()) {
        if (consume) next();
        return;
      }
      if (t.is_punct("(") || t.is_punct("{") || t.is_punct("[")) ++depth;
      if (t.is_punct(")") || t.is_punct("}") || t.is_punct("]")) depth = std::max(0, depth - 1);
      next();
    }
  }

  /// Classifies the literal starting at the cursor by its first depth-0
  /// comparison operator, brace, aggregate, or terminator.
  enum class Shape { Atom, Comparison, Aggregate };
  Shape literal_shape() const {
    int depth = 0;
    for (std::size_t k = pos_; k < toks_.size(); ++k) {
      const Token& t = toks_[k];
      if (is_aggregate_directive(t) || t.is_punct("{")) return Shape::Aggregate;
      if (t.is_punct("(") || t.is_punct("[")) ++depth;
      else if (t.is_punct(")") || t.is_punct("]")) {
        if (--depth < 0) return Shape::Atom;
      } else if (depth == 0) {
        if (t.kind == TokenKind::Comparison) {
          const Token& rhs = k + 1 < toks_.size() ? toks_[k + 1] : eof_;
          if (is_aggregate_directive(rhs) || rhs.is_punct("{")) return Shape::Aggregate;
          return Shape::Comparison;
        }
        if (t.kind == TokenKind::Punctuation &&
            (t.text == "," || t.text == "." || t.text == ":-" || t.text == ";" ||
             t.text == ":" || t.text == "|"))
          return Shape::Atom;
      }
    }
    return Shape::Atom;
  }

  BodyLiteral literal() {
    const Token& t = peek();
    if (t.is(TokenKind::Identifier, "not")) {
      next();
      const Token& u = peek();
      if (u.is(TokenKind::Identifier, "not")) throw Unsupported{u.span, "double negation"};
      if (u.is(TokenKind::Arithmetic, "-") && peek(1).kind == TokenKind::Identifier)
        throw Unsupported{u.span, "classical negation"};
      switch (literal_shape()) {
      case Shape::Aggregate: throw Unsupported{u.span, "aggregate"};
      case Shape::Comparison: throw Unsupported{u.span, "negated comparison"};
      case Shape::Atom: break;
      }
      if (u.kind != TokenKind::Identifier) fail({"atom"});
      return NegatedLiteral{atom()};
    }
    if (t.is_punct("|")) throw Unsupported{t.span, "absolute value"};
    Shape shape = literal_shape();
    if (shape == Shape::Aggregate) throw Unsupported{t.span, "aggregate"};
    if (shape == Shape::Comparison) {
      ComparisonLiteral c;
      c.left = operand();
      const Token& op = peek();
      if (op.kind != TokenKind::Comparison) fail({"comparison operator"});
      c.op = *compare_op_from(next().text);
      c.right = operand();
      return c;
    }
    if (t.is(TokenKind::Arithmetic, "-") && peek(1).kind == TokenKind::Identifier)
      throw Unsupported{t.span, "classical negation"};
    if (t.kind != TokenKind::Identifier) fail({"literal"});
    return PositiveLiteral{atom()};
  }

  // ---- atoms and terms ----

  Atom atom() {
    const Token& t = peek();
    if (t.kind != TokenKind::Identifier || t.text == "not") fail({"atom"});
    Atom a{next().text, {}};
    if (peek().is_punct("(")) {
      next();
      a.args = argument_list();
    }
    return a;
  }

  std::vector<Term> argument_list() {
    std::vector<Term> args;
    for (;;) {
      args.push_back(argument());
      const Token& t = peek();
      if (t.is_punct(",")) {
        next();
        continue;
      }
      if (t.is_punct(")")) {
        next();
        return args;
      }
      if (t.is_punct(";")) throw Unsupported{t.span, "pool"};
      fail({"','", "')'"});
    }
  }

  void reject_compound_argument() const {
    const Token& t = peek();
    if (t.kind == TokenKind::Arithmetic) throw Unsupported{t.span, "arithmetic term in atom argument"};
    if (t.is_punct("..")) throw Unsupported{t.span, "interval"};
  }

  Term argument() {
    const Token& t = peek();
    Term term;
    if (t.kind == TokenKind::Variable) {
      next();
      term = t.text == "_" ? Term::anonymous() : Term::variable(t.text);
    } else if (t.kind == TokenKind::Integer) {
      term = Term::integer(integer_value(next()));
    } else if (t.is(TokenKind::Arithmetic, "-")) {
      if (peek(1).kind != TokenKind::Integer)
        throw Unsupported{t.span, "arithmetic term in atom argument"};
      next();
      term = Term::integer(-integer_value(next()));
    } else if (t.kind == TokenKind::Identifier) {
      std::string name = next().text;
      if (peek().is_punct("(")) {
        next();
        term = Term::function(std::move(name), argument_list());
      } else {
        term = Term::constant(std::move(name));
      }
    } else if (t.is_punct("(")) {
      throw Unsupported{t.span, "tuple or pool term"};
    } else if (is_aggregate_directive(t) || t.is_punct("{")) {
      throw Unsupported{t.span, "aggregate"};
    } else {
      fail({"term"});
    }
    reject_compound_argument();
    return term;
  }

  Term operand() {
    Term lhs = product();
    while (peek().is(TokenKind::Arithmetic, "+") || peek().is(TokenKind::Arithmetic, "-")) {
      ArithOp op = *arith_op_from(next().text);
      lhs = Term::arith(op, std::move(lhs), product());
    }
    return lhs;
  }

  Term product() {
    Term lhs = unary();
    while (peek().is(TokenKind::Arithmetic, "*") || peek().is(TokenKind::Arithmetic, "/")) {
      ArithOp op = *arith_op_from(next().text);
      lhs = Term::arith(op, std::move(lhs), unary());
    }
    return lhs;
  }

  Term unary() {
    if (peek().is(TokenKind::Arithmetic, "-")) {
      next();
      if (peek().kind == TokenKind::Integer) {
        Term t = Term::integer(-integer_value(next()));
        reject_interval();
        return t;
      }
      return Term::negate(unary());
    }
    return primary();
  }

  void reject_interval() const {
    if (peek().is_punct("..")) throw Unsupported{peek().span, "interval"};
  }

  Term primary() {
    const Token& t = peek();
    Term term;
    if (t.kind == TokenKind::Integer) {
      term = Term::integer(integer_value(next()));
    } else if (t.kind == TokenKind::Variable) {
      if (t.text == "_") throw Unsupported{t.span, "anonymous variable in comparison"};
      term = Term::variable(next().text);
    } else if (t.kind == TokenKind::Identifier) {
      if (peek(1).is_punct("(")) throw Unsupported{t.span, "function term in comparison"};
      term = Term::constant(next().text);
    } else if (t.is_punct("(")) {
      next();
      term = operand();
      if (peek().is_punct(",") || peek().is_punct(";"))
        throw Unsupported{peek().span, "tuple or pool term"};
      expect_punct(")");
    } else {
      fail({"integer", "variable", "constant", "'('"});
    }
    reject_interval();
    return term;
  }

  // ---- comment attachment ----

  void add_item(const Span& span, ItemKind kind) {
    items_.push_back(Item{span.start, span.line, kind});
  }

  /// A run of comments on consecutive lines that ends on the line right
  /// before a rule (kept or recovered) documents that rule.
  void attach_comments(Program& program) {
    std::sort(items_.begin(), items_.end(),
              [](const Item& a, const Item& b) { return a.offset < b.offset; });
    std::vector<std::size_t> attached_offsets;
    for (std::size_t i = 0; i < items_.size();) {
      if (items_[i].kind != ItemKind::Comment) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < items_.size() && items_[j + 1].kind == ItemKind::Comment &&
             items_[j + 1].line == items_[j].line + 1)
        ++j;
      if (j + 1 < items_.size() && items_[j + 1].kind == ItemKind::Rule &&
          items_[j + 1].line == items_[j].line + 1) {
        for (std::size_t k = i; k <= j; ++k) attached_offsets.push_back(items_[k].offset);
      }
      i = j + 1;
    }
    for (auto& s : program.statements) {
      if (auto* c = std::get_if<Comment>(&s.node))
        c->attached = std::find(attached_offsets.begin(), attached_offsets.end(),
                                s.span.start) != attached_offsets.end();
    }
  }

  std::vector<Token> toks_;
  std::vector<Token> comments_;
  Token eof_;
  std::size_t pos_ = 0;
  std::vector<Item> items_;
};

} // namespace detail

/// Parses a knowledge-base source. Never throws on bad input: lexical and
/// syntax errors become error diagnostics, constructs outside the supported
/// subset become warnings, and parsing resumes at the next statement.
inline ParseResult parse_program(std::string_view source, std::string source_name = "<input>") {
  ParseResult result;
  result.program.source_name = std::move(source_name);
  std::vector<LexError> lex_errors;
  auto tokens = tokenize_lenient(source, lex_errors);
  for (const auto& e : lex_errors) {
    Diagnostic d;
    d.severity = Severity::Error;
    d.code = "lex-error";
    d.span = e.span();
    d.message = e.what();
    result.diagnostics.push_back(std::move(d));
  }
  detail::Parser parser(std::move(tokens), source.size());
  parser.run(result);
  std::stable_sort(result.diagnostics.begin(), result.diagnostics.end(),
                   [](const Diagnostic& a, const Diagnostic& b) {
                     return a.span.start < b.span.start;
                   });
  return result;
}

} // namespace kbviz
