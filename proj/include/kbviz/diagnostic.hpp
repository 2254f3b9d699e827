#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kbviz {

/// Byte range [start, end) into the source plus the 1-based line/column of
/// `start`. Columns count bytes.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t line = 1;
  std::size_t col = 1;

  bool operator==(const Span&) const = default;
  std::size_t size() const { return end - start; }
};

inline Span cover(const Span& first, const Span& last) {
  return Span{first.start, last.end, first.line, first.col};
}

enum class Severity { Warning, Error };

inline const char* to_string(Severity s) {
  return s == Severity::Warning ? "warning" : "error";
}

/// Base class for errors that point into source text.
class SourceError : public std::runtime_error {
public:
  SourceError(Span span, const std::string& message)
      : std::runtime_error(message), span_(span) {}
  const Span& span() const { return span_; }

private:
  Span span_;
};

class LexError : public SourceError {
public:
  using SourceError::SourceError;
};

class ParseError : public SourceError {
public:
  ParseError(Span span, std::vector<std::string> expected, std::string found)
      : SourceError(span, make_message(expected, found)),
        expected_(std::move(expected)), found_(std::move(found)) {}

  const std::vector<std::string>& expected() const { return expected_; }
  const std::string& found() const { return found_; }

private:
  static std::string make_message(const std::vector<std::string>& expected,
                                  const std::string& found) {
    std::string msg = "expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i > 0) msg += i + 1 == expected.size() ? " or " : ", ";
      msg += expected[i];
    }
    msg += " but found " + found;
    return msg;
  }

  std::vector<std::string> expected_;
  std::string found_;
};

inline std::string format_location(const std::string& source_name,
                                   const Span& span) {
  return source_name + ":" + std::to_string(span.line) + ":" +
         std::to_string(span.col);
}

} // namespace kbviz
