#include <cctype>

#include "parser_support.hpp"

namespace varcat::detail {
namespace {

// '>' is never merged here: the parser re-joins adjacent '>' tokens into
// shift and comparison operators, which keeps nested generics simple.
const std::vector<std::string_view> kJavaOperators = {
    "<<=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", "+=", "-=",
    "*=",  "/=",  "&=", "|=", "^=", "%=", "<<", "(",  ")",  "{",  "}",  "[",  "]",
    ";",   ",",   ".",  "@",  "=",  ">",  "<",  "!",  "~",  "?",  ":",  "+",  "-",
    "*",   "/",   "&",  "|",  "^",  "%",
};

class JavaLexer {
 public:
  explicit JavaLexer(std::string_view source) : src_(source) {}

  LexResult run() {
    while (pos_ < src_.size()) {
      unsigned char c = static_cast<unsigned char>(src_[pos_]);
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f') {
        ++pos_;
      } else if (c == '/' && peek_char(1) == '/') {
        std::size_t start = pos_;
        while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
        out_.comments.push_back({start, pos_});
      } else if (c == '/' && peek_char(1) == '*') {
        std::size_t start = pos_;
        std::size_t close = src_.find("*/", pos_ + 2);
        if (close == std::string_view::npos) fail("unterminated comment");
        pos_ = close + 2;
        out_.comments.push_back({start, pos_});
      } else if (is_ident_start(c, true)) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[pos_]), true)) ++pos_;
        push(TokenKind::kName, start);
      } else if (is_digit(c) || (c == '.' && is_digit(static_cast<unsigned char>(peek_char(1))))) {
        lex_number();
      } else if (c == '"') {
        lex_string();
      } else if (c == '\'') {
        lex_char();
      } else {
        std::size_t len = match_operator(src_, pos_, kJavaOperators);
        if (len == 0) fail("unexpected character");
        std::size_t start = pos_;
        pos_ += len;
        push(TokenKind::kOperator, start);
      }
    }
    out_.tokens.push_back(Token{TokenKind::kEnd, src_.size(), src_.size()});
    return std::move(out_);
  }

 private:
  char peek_char(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }
  void push(TokenKind kind, std::size_t start) { out_.tokens.push_back(Token{kind, start, pos_}); }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("java: " + what, pos_);
  }

  void lex_number() {
    std::size_t start = pos_;
    auto run = [&](auto pred) {
      while (pos_ < src_.size() && (pred(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    };
    bool hex = src_[pos_] == '0' && (peek_char(1) == 'x' || peek_char(1) == 'X');
    bool bin = src_[pos_] == '0' && (peek_char(1) == 'b' || peek_char(1) == 'B');
    if (hex || bin) {
      pos_ += 2;
      run([](unsigned char c) { return std::isxdigit(c) != 0; });
      if (hex && pos_ < src_.size() && src_[pos_] == '.') {
        ++pos_;
        run([](unsigned char c) { return std::isxdigit(c) != 0; });
      }
      if (hex && pos_ < src_.size() && (src_[pos_] == 'p' || src_[pos_] == 'P')) {
        ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
        run(is_digit);
      }
    } else {
      run(is_digit);
      if (pos_ < src_.size() && src_[pos_] == '.' && is_digit(static_cast<unsigned char>(peek_char(1)))) {
        ++pos_;
        run(is_digit);
      } else if (pos_ < src_.size() && src_[pos_] == '.' &&
                 !is_ident_start(static_cast<unsigned char>(peek_char(1)), true) && peek_char(1) != '.') {
        ++pos_;  // "1." is a double literal
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
        run(is_digit);
      }
    }
    if (pos_ < src_.size() && std::string_view("lLfFdD").find(src_[pos_]) != std::string_view::npos) ++pos_;
    push(TokenKind::kNumber, start);
  }

  void lex_string() {
    std::size_t start = pos_;
    if (src_.substr(pos_, 3) == "\"\"\"") {
      std::size_t i = pos_ + 3;
      while (true) {
        if (i >= src_.size()) fail("unterminated text block");
        if (src_[i] == '\\') {
          i += 2;
          continue;
        }
        if (src_.substr(i, 3) == "\"\"\"") break;
        ++i;
      }
      pos_ = i + 3;
      push(TokenKind::kString, start);
      return;
    }
    ++pos_;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n' || src_[pos_] == '\r') fail("unterminated string");
      if (src_[pos_] == '\\') {
        pos_ += 2;
        continue;
      }
      if (src_[pos_] == '"') break;
      ++pos_;
    }
    ++pos_;
    push(TokenKind::kString, start);
  }

  void lex_char() {
    std::size_t start = pos_;
    ++pos_;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') fail("unterminated character literal");
      if (src_[pos_] == '\\') {
        pos_ += 2;
        continue;
      }
      if (src_[pos_] == '\'') break;
      ++pos_;
    }
    ++pos_;
    push(TokenKind::kCharacter, start);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  LexResult out_;
};

}  // namespace

LexResult lex_java(std::string_view source) { return JavaLexer(source).run(); }

}  // namespace varcat::detail
