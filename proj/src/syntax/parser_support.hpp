#pragma once

// Shared lexer/parser plumbing for the bundled grammars.

#include <string_view>
#include <utility>
#include <vector>

#include "varcat/syntax.hpp"

namespace varcat::detail {

enum class TokenKind {
  kName,
  kNumber,
  kString,
  kCharacter,
  kOperator,
  kNewline,
  kIndent,
  kDedent,
  kEnd,
};

struct Token {
  TokenKind kind;
  std::size_t start;
  std::size_t end;
};

struct LexResult {
  std::vector<Token> tokens;
  std::vector<ByteRange> comments;
};

inline bool is_ident_start(unsigned char c, bool allow_dollar) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80 ||
         (allow_dollar && c == '$');
}

inline bool is_ident_char(unsigned char c, bool allow_dollar) {
  return is_ident_start(c, allow_dollar) || (c >= '0' && c <= '9');
}

inline bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

inline Node make_leaf(std::string_view kind, const Token& token) {
  return Node{kind, {token.start, token.end}, {}, true};
}

/// Inner node spanning its first to last child. Children must be non-empty.
inline Node make_node(std::string_view kind, std::vector<Node> children) {
  ByteRange range{children.front().range.start, children.back().range.end};
  return Node{kind, range, std::move(children), false};
}

/// Longest-match lookup of an operator at `pos`; returns its length or 0.
inline std::size_t match_operator(std::string_view source, std::size_t pos,
                                  const std::vector<std::string_view>& operators) {
  for (std::string_view op : operators) {
    if (source.substr(pos, op.size()) == op) return op.size();
  }
  return 0;
}

LexResult lex_python(std::string_view source, std::size_t begin, std::size_t end,
                     bool expression_mode);
Node parse_python(std::string_view source, const LexResult& lexed);

LexResult lex_java(std::string_view source);
Node parse_java(std::string_view source, const LexResult& lexed);

}  // namespace varcat::detail
