#pragma once

#include "kbviz/diagnostic.hpp"

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace kbviz {

enum class TokenKind {
  Identifier,
  Variable,
  Integer,
  Punctuation,
  Comparison,
  Arithmetic,
  Comment,
  Directive,
};

inline const char* to_string(TokenKind k) {
  switch (k) {
  case TokenKind::Identifier: return "identifier";
  case TokenKind::Variable: return "variable";
  case TokenKind::Integer: return "integer";
  case TokenKind::Punctuation: return "punctuation";
  case TokenKind::Comparison: return "comparison-operator";
  case TokenKind::Arithmetic: return "arithmetic-operator";
  case TokenKind::Comment: return "comment";
  case TokenKind::Directive: return "directive";
  }
  return "?";
}

struct Token {
  TokenKind kind;
  std::string text;
  Span span;

  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool is_punct(std::string_view t) const { return is(TokenKind::Punctuation, t); }
};

namespace detail {

inline bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_word(char c) {
  return is_lower(c) || is_upper(c) || is_digit(c) || c == '_' || c == '\'';
}
inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Longest match first.
inline constexpr std::array<std::string_view, 15> kPunctuation = {
    "..", ":-", ":~", "(", ")", ",", ".", ":", ";", "{", "}", "[", "]", "|", "@"};
inline constexpr std::array<std::string_view, 8> kComparison = {
    "==", "!=", "<>", "<=", ">=", "=", "<", ">"};
inline constexpr std::array<std::string_view, 4> kArithmetic = {"+", "-", "*", "/"};

class Lexer {
public:
  using ErrorSink = std::function<void(const LexError&)>;

  Lexer(std::string_view src, ErrorSink on_error)
      : src_(src), on_error_(std::move(on_error)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (is_space(c)) {
        advance(1);
        continue;
      }
      std::size_t start = pos_;
      Span span{pos_, pos_, line_, col_};
      TokenKind kind;
      if (c == '%') {
        std::size_t n = 0;
        while (pos_ + n < src_.size() && src_[pos_ + n] != '\n' && src_[pos_ + n] != '\r') ++n;
        kind = TokenKind::Comment;
        advance(n);
      } else if (is_lower(c) || is_upper(c) || c == '_') {
        std::size_t n = 0;
        while (pos_ + n < src_.size() && src_[pos_ + n] == '_') ++n;
        char first = pos_ + n < src_.size() ? src_[pos_ + n] : '\0';
        if (is_lower(first) || is_upper(first)) {
          while (pos_ + n < src_.size() && is_word(src_[pos_ + n])) ++n;
          kind = is_upper(first) ? TokenKind::Variable : TokenKind::Identifier;
          advance(n);
        } else {
          // a lone underscore is the anonymous variable
          kind = TokenKind::Variable;
          advance(1);
        }
      } else if (is_digit(c)) {
        std::size_t n = 0;
        while (pos_ + n < src_.size() && is_digit(src_[pos_ + n])) ++n;
        kind = TokenKind::Integer;
        advance(n);
      } else if (c == '#') {
        std::size_t n = 1;
        while (pos_ + n < src_.size() && is_lower(src_[pos_ + n])) ++n;
        if (n == 1) {
          error(span, "'#' must start a directive name");
          continue;
        }
        kind = TokenKind::Directive;
        advance(n);
      } else if (auto m = match(kPunctuation); !m.empty()) {
        kind = TokenKind::Punctuation;
        advance(m.size());
      } else if (auto m2 = match(kComparison); !m2.empty()) {
        kind = TokenKind::Comparison;
        advance(m2.size());
      } else if (auto m3 = match(kArithmetic); !m3.empty()) {
        kind = TokenKind::Arithmetic;
        advance(m3.size());
      } else {
        error(span, describe_byte(c));
        continue;
      }
      span.end = pos_;
      out.push_back(Token{kind, std::string(src_.substr(start, pos_ - start)), span});
    }
    return out;
  }

private:
  template <std::size_t N>
  std::string_view match(const std::array<std::string_view, N>& table) const {
    for (auto candidate : table)
      if (src_.substr(pos_, candidate.size()) == candidate) return candidate;
    return {};
  }

  static std::string describe_byte(char c) {
    auto u = static_cast<unsigned char>(c);
    if (u >= 0x20 && u < 0x7f) return std::string("unexpected character '") + c + "'";
    static const char* hex = "0123456789abcdef";
    return std::string("unexpected byte 0x") + hex[u >> 4] + hex[u & 15];
  }

  void error(Span span, const std::string& message) {
    advance(1);
    span.end = pos_;
    on_error_(LexError(span, message));
  }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i, ++pos_) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
    }
  }

  std::string_view src_;
  ErrorSink on_error_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

} // namespace detail

/// Full token stream, comments included. Throws LexError at the first byte
/// outside the token alphabet.
inline std::vector<Token> tokenize(std::string_view source) {
  detail::Lexer lexer(source, [](const LexError& e) { throw e; });
  return lexer.run();
}

/// Like tokenize(), but reports bad bytes to `sink` and skips them.
inline std::vector<Token> tokenize_lenient(std::string_view source,
                                           std::vector<LexError>& sink) {
  detail::Lexer lexer(source, [&](const LexError& e) { sink.push_back(e); });
  return lexer.run();
}

} // namespace kbviz
