#pragma once

#include <charconv>
#include <limits>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "qmrf/errors.hpp"

namespace qmrf::detail {

// Whitespace-separated token reader over an in-memory buffer. Tracks the
// byte offset so parse errors can say where they happened.
class TextScanner {
 public:
  explicit TextScanner(std::string text, char comment = '#')
      : text_(std::move(text)), comment_(comment) {}

  bool at_end() {
    skip_blank();
    return pos_ >= text_.size();
  }

  std::size_t offset() const { return pos_; }

  std::string_view token() {
    skip_blank();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != comment_) ++pos_;
    return std::string_view(text_).substr(start, pos_ - start);
  }

  void expect(std::string_view word) {
    std::size_t at = peek_offset();
    if (token() != word) throw ParseError("expected '" + std::string(word) + "'", at);
  }

  double real() {
    std::size_t at = peek_offset();
    std::string_view t = token();
    // from_chars for double is available in libstdc++ 11
    double v = 0.0;
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
      throw ParseError("expected a number, got '" + std::string(t) + "'", at);
    return v;
  }

  std::int64_t integer() {
    std::size_t at = peek_offset();
    std::string_view t = token();
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
      throw ParseError("expected an integer, got '" + std::string(t) + "'", at);
    return v;
  }

  std::size_t peek_offset() {
    skip_blank();
    return pos_;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

  void skip_blank() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (is_space(c)) {
        ++pos_;
      } else if (c == comment_) {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string text_;
  char comment_;
  std::size_t pos_ = 0;
};

}  // namespace qmrf::detail
