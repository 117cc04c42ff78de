#include <algorithm>
#include <cctype>
#include <string>

#include "parser_support.hpp"

namespace varcat::detail {
namespace {

// Sorted longest first so match_operator picks the longest spelling.
const std::vector<std::string_view> kPythonOperators = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=", ">=",
    "==",  "!=",  "<>",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "@=", "+",
    "-",   "*",   "/",   "%",   "@",   "&",  "|",  "^",  "~",  "<",  ">",  "(",  ")",
    "[",   "]",   "{",   "}",   ",",   ":",  ".",  ";",  "=",  "`",  "!",
};

bool is_string_prefix(std::string_view word) {
  if (word.size() > 2) return false;
  std::string lower;
  for (char c : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lower == "r" || lower == "u" || lower == "b" || lower == "f" || lower == "br" ||
         lower == "rb" || lower == "fr" || lower == "rf" || lower == "ur";
}

class PythonLexer {
 public:
  PythonLexer(std::string_view source, std::size_t begin, std::size_t end, bool expression_mode)
      : src_(source), pos_(begin), end_(end), expression_mode_(expression_mode) {
    if (expression_mode_) depth_ = 1;
  }

  LexResult run() {
    bool at_line_start = !expression_mode_;
    while (true) {
      if (at_line_start && depth_ == 0) {
        if (!handle_indentation()) break;
        at_line_start = false;
        continue;
      }
      if (pos_ >= end_) break;
      unsigned char c = static_cast<unsigned char>(src_[pos_]);
      if (c == ' ' || c == '\t' || c == '\f') {
        ++pos_;
      } else if (c == '#') {
        skip_comment();
      } else if (c == '\\' && is_newline_at(pos_ + 1)) {
        pos_ += 1 + newline_length(pos_ + 1);
      } else if (c == '\n' || c == '\r') {
        std::size_t len = newline_length(pos_);
        if (depth_ == 0) {
          push(TokenKind::kNewline, pos_, pos_ + len);
          at_line_start = true;
        }
        pos_ += len;
      } else if (is_ident_start(c, false)) {
        lex_name_or_string();
      } else if (is_digit(c) || (c == '.' && pos_ + 1 < end_ && is_digit(src_[pos_ + 1]))) {
        lex_number();
      } else if (c == '\'' || c == '"') {
        lex_string(pos_);
      } else {
        lex_operator();
      }
    }
    finish();
    return std::move(out_);
  }

 private:
  bool is_newline_at(std::size_t p) const {
    return p < end_ && (src_[p] == '\n' || src_[p] == '\r');
  }

  std::size_t newline_length(std::size_t p) const {
    if (src_[p] == '\r' && p + 1 < end_ && src_[p + 1] == '\n') return 2;
    return 1;
  }

  void push(TokenKind kind, std::size_t start, std::size_t stop) {
    out_.tokens.push_back(Token{kind, start, stop});
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  void skip_comment() {
    std::size_t start = pos_;
    while (pos_ < end_ && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
    out_.comments.push_back({start, pos_});
  }

  // Measures the indentation of the next logical line and emits
  // INDENT/DEDENT tokens. Blank and comment-only lines are skipped.
  bool handle_indentation() {
    while (pos_ < end_) {
      std::size_t col = 0;
      while (pos_ < end_) {
        char c = src_[pos_];
        if (c == ' ') {
          ++col;
        } else if (c == '\t') {
          col = (col / 8 + 1) * 8;
        } else if (c == '\f') {
          col = 0;
        } else {
          break;
        }
        ++pos_;
      }
      if (pos_ >= end_) return false;
      char c = src_[pos_];
      if (c == '#') {
        skip_comment();
        continue;
      }
      if (c == '\n' || c == '\r') {
        pos_ += newline_length(pos_);
        continue;
      }
      if (c == '\\' && is_newline_at(pos_ + 1)) {
        pos_ += 1 + newline_length(pos_ + 1);
        continue;
      }
      if (indents_.empty()) {
        // The first line fixes the base level, so snippets cut out of an
        // indented class body still lex.
        indents_.push_back(col);
      } else if (col > indents_.back()) {
        indents_.push_back(col);
        push(TokenKind::kIndent, pos_, pos_);
      } else {
        while (col < indents_.back()) {
          indents_.pop_back();
          if (indents_.empty() || col > indents_.back()) fail("inconsistent dedent");
          push(TokenKind::kDedent, pos_, pos_);
        }
      }
      return true;
    }
    return false;
  }

  void lex_name_or_string() {
    std::size_t start = pos_;
    while (pos_ < end_ && is_ident_char(static_cast<unsigned char>(src_[pos_]), false)) ++pos_;
    std::string_view word = src_.substr(start, pos_ - start);
    if (pos_ < end_ && (src_[pos_] == '\'' || src_[pos_] == '"') && is_string_prefix(word)) {
      lex_string(start);
      return;
    }
    push(TokenKind::kName, start, pos_);
  }

  void lex_number() {
    std::size_t start = pos_;
    auto digits = [&](auto pred) {
      while (pos_ < end_ && (pred(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    };
    if (src_[pos_] == '0' && pos_ + 1 < end_ &&
        std::string_view("xXoObB").find(src_[pos_ + 1]) != std::string_view::npos) {
      pos_ += 2;
      digits([](unsigned char c) { return std::isxdigit(c) != 0; });
    } else {
      digits(is_digit);
      if (pos_ < end_ && src_[pos_] == '.') {
        ++pos_;
        digits(is_digit);
      }
      if (pos_ < end_ && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t save = pos_;
        ++pos_;
        if (pos_ < end_ && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
        if (pos_ < end_ && is_digit(src_[pos_])) {
          digits(is_digit);
        } else {
          pos_ = save;
        }
      }
    }
    if (pos_ < end_ && std::string_view("jJlL").find(src_[pos_]) != std::string_view::npos) ++pos_;
    push(TokenKind::kNumber, start, pos_);
  }

  void lex_string(std::size_t start) {
    char quote = src_[pos_];
    bool triple = pos_ + 2 < end_ && src_[pos_ + 1] == quote && src_[pos_ + 2] == quote;
    pos_ += triple ? 3 : 1;
    while (true) {
      if (pos_ >= end_) fail("unterminated string");
      char c = src_[pos_];
      if (c == '\\') {
        pos_ += 2;
        continue;
      }
      if (!triple && (c == '\n' || c == '\r')) fail("newline in string literal");
      if (c == quote) {
        if (!triple) {
          ++pos_;
          break;
        }
        if (pos_ + 2 < end_ && src_[pos_ + 1] == quote && src_[pos_ + 2] == quote) {
          pos_ += 3;
          break;
        }
      }
      ++pos_;
    }
    if (pos_ > end_) fail("unterminated string");
    push(TokenKind::kString, start, pos_);
  }

  void lex_operator() {
    std::size_t len = match_operator(src_.substr(0, end_), pos_, kPythonOperators);
    if (len == 0) fail("unexpected character");
    std::string_view op = src_.substr(pos_, len);
    if (op == "(" || op == "[" || op == "{") {
      ++depth_;
    } else if (op == ")" || op == "]" || op == "}") {
      if (depth_ == (expression_mode_ ? 1 : 0)) fail("unbalanced bracket");
      --depth_;
    }
    push(TokenKind::kOperator, pos_, pos_ + len);
    pos_ += len;
  }

  void finish() {
    if (!expression_mode_ && depth_ != 0) fail("unclosed bracket");
    if (!expression_mode_) {
      if (!out_.tokens.empty() && out_.tokens.back().kind != TokenKind::kNewline) {
        push(TokenKind::kNewline, end_, end_);
      }
      for (std::size_t i = 1; i < indents_.size(); ++i) push(TokenKind::kDedent, end_, end_);
    }
    push(TokenKind::kEnd, end_, end_);
  }

  std::string_view src_;
  std::size_t pos_;
  std::size_t end_;
  bool expression_mode_;
  int depth_ = 0;
  std::vector<std::size_t> indents_;
  LexResult out_;
};

}  // namespace

LexResult lex_python(std::string_view source, std::size_t begin, std::size_t end,
                     bool expression_mode) {
  return PythonLexer(source, begin, end, expression_mode).run();
}

}  // namespace varcat::detail
