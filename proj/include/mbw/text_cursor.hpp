#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "mbw/errors.hpp"

namespace mbw {

/// Character cursor over a term in one of the bracketed text formats. Errors
/// carry line and column.
class TextCursor {
 public:
  explicit TextCursor(std::string_view text) : text_(text) {}

  void skip_ws() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      } else if (text_[pos_] == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool at_end() {
    skip_ws();
    return pos_ == text_.size();
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  /// A run of letters, digits, '_' or '-' (possibly empty).
  std::string word() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                                   text_[pos_] == '-'))
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  void expect_word(std::string_view w) {
    const std::size_t at = pos_;
    if (word() != w) {
      pos_ = at;
      fail("expected '" + std::string(w) + "'");
    }
  }

  long long integer() {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '-') ++pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start || (pos_ == start + 1 && text_[start] == '-')) {
      pos_ = start;
      fail("expected an integer");
    }
    if (pos_ - start > 12) {
      pos_ = start;
      fail("integer too large");
    }
    return std::stoll(std::string(text_.substr(start, pos_ - start)));
  }

  std::size_t position() const { return pos_; }

  std::string where() const {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
  }

  [[noreturn]] void fail(const std::string& message) const { throw InputError(where() + ": " + message); }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace mbw
