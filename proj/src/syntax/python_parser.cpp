// Recursive-descent parser for Python 3 (plus the Python 2 print/exec
// statements and `except E, e` clauses still common in mined corpora).

#include <algorithm>
#include <array>
#include <cctype>
#include <initializer_list>
#include <optional>
#include <string>

#include "parser_support.hpp"

namespace varcat::detail {
namespace {

constexpr std::array<std::string_view, 35> kHardKeywords = {
    "False", "None",   "True",    "and",      "as",       "assert", "async",
    "await", "break",  "class",   "continue", "def",      "del",    "elif",
    "else",  "except", "finally", "for",      "from",     "global", "if",
    "import", "in",    "is",      "lambda",   "nonlocal", "not",    "or",
    "pass",  "raise",  "return",  "try",      "while",    "with",   "yield"};

bool is_hard_keyword(std::string_view word) {
  return std::find(kHardKeywords.begin(), kHardKeywords.end(), word) != kHardKeywords.end();
}

class PythonParser {
 public:
  PythonParser(std::string_view source, const std::vector<Token>& tokens)
      : src_(source), toks_(tokens) {}

  Node parse_module() {
    std::vector<Node> body;
    while (!at(TokenKind::kEnd)) {
      if (at(TokenKind::kNewline)) {
        ++pos_;
        continue;
      }
      parse_statement(body);
    }
    return Node{"module", {0, src_.size()}, std::move(body), false};
  }

  // Entry point for f-string interpolations lexed in expression mode.
  Node parse_interpolation_expression() {
    Node expr = at_name("yield") ? parse_yield() : parse_testlist_star_expr();
    if (!at(TokenKind::kEnd)) fail("unexpected token in interpolation");
    return expr;
  }

 private:
  // ---- token helpers -------------------------------------------------------

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  std::string_view text(const Token& t) const { return src_.substr(t.start, t.end - t.start); }
  bool at(TokenKind kind) const { return peek().kind == kind; }
  bool at_op(std::string_view op, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::kOperator && text(t) == op;
  }
  bool at_name(std::string_view word, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::kName && text(t) == word;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("python: " + what, peek().start);
  }

  Node op_leaf(std::string_view op) {
    if (!at_op(op)) fail("expected '" + std::string(op) + "'");
    return make_leaf(leaf::kOperator, toks_[pos_++]);
  }
  Node keyword(std::string_view word) {
    if (!at_name(word)) fail("expected '" + std::string(word) + "'");
    return make_leaf(leaf::kKeyword, toks_[pos_++]);
  }
  Node name_leaf(std::string_view kind) {
    if (!at(TokenKind::kName)) fail("expected name");
    return make_leaf(kind, toks_[pos_++]);
  }
  Node identifier() {
    if (!at(TokenKind::kName) || is_hard_keyword(text(peek()))) fail("expected identifier");
    return make_leaf(leaf::kIdentifier, toks_[pos_++]);
  }
  void expect_newline() {
    if (at(TokenKind::kNewline)) {
      ++pos_;
      return;
    }
    if (at(TokenKind::kEnd)) return;
    fail("expected end of statement");
  }

  // ---- statements ----------------------------------------------------------

  void parse_statement(std::vector<Node>& out) {
    if (at(TokenKind::kIndent)) fail("unexpected indent");
    if (at(TokenKind::kDedent)) fail("unexpected dedent");
    if (at_op("@")) {
      out.push_back(parse_decorated());
      return;
    }
    if (at(TokenKind::kName)) {
      std::string_view word = text(peek());
      if (word == "if") return out.push_back(parse_if());
      if (word == "while") return out.push_back(parse_while());
      if (word == "for") return out.push_back(parse_for(std::nullopt));
      if (word == "try") return out.push_back(parse_try());
      if (word == "with") return out.push_back(parse_with(std::nullopt));
      if (word == "def") return out.push_back(parse_funcdef(std::nullopt));
      if (word == "class") return out.push_back(parse_classdef());
      if (word == "async" && (at_name("def", 1) || at_name("for", 1) || at_name("with", 1))) {
        Node async_kw = keyword("async");
        if (at_name("def")) return out.push_back(parse_funcdef(std::move(async_kw)));
        if (at_name("for")) return out.push_back(parse_for(std::move(async_kw)));
        return out.push_back(parse_with(std::move(async_kw)));
      }
      if (word == "match" && looks_like_block_header("case")) {
        return out.push_back(parse_match());
      }
    }
    parse_simple_statements(out);
  }

  // True when the logical line ends with ':' and the indented block that
  // follows starts with `opener` (used for the soft keywords match/case).
  bool looks_like_block_header(std::string_view opener) const {
    std::size_t i = pos_;
    while (i < toks_.size() && toks_[i].kind != TokenKind::kNewline &&
           toks_[i].kind != TokenKind::kEnd) {
      ++i;
    }
    if (i == pos_ || i + 2 >= toks_.size()) return false;
    const Token& last = toks_[i - 1];
    if (last.kind != TokenKind::kOperator || text(last) != ":") return false;
    return toks_[i + 1].kind == TokenKind::kIndent && toks_[i + 2].kind == TokenKind::kName &&
           text(toks_[i + 2]) == opener;
  }

  void parse_simple_statements(std::vector<Node>& out) {
    out.push_back(parse_small_statement());
    while (at_op(";")) {
      out.push_back(op_leaf(";"));
      if (at(TokenKind::kNewline) || at(TokenKind::kEnd)) break;
      out.push_back(parse_small_statement());
    }
    expect_newline();
  }

  Node parse_block() {
    if (!at(TokenKind::kNewline)) {
      std::vector<Node> body;
      parse_simple_statements(body);
      return make_node("block", std::move(body));
    }
    ++pos_;
    if (!at(TokenKind::kIndent)) fail("expected an indented block");
    ++pos_;
    std::vector<Node> body;
    while (!at(TokenKind::kDedent) && !at(TokenKind::kEnd)) {
      if (at(TokenKind::kNewline)) {
        ++pos_;
        continue;
      }
      parse_statement(body);
    }
    if (at(TokenKind::kDedent)) ++pos_;
    if (body.empty()) fail("empty block");
    return make_node("block", std::move(body));
  }

  Node parse_decorated() {
    std::vector<Node> children;
    while (at_op("@")) {
      std::vector<Node> deco;
      deco.push_back(op_leaf("@"));
      deco.push_back(parse_namedexpr_test());
      expect_newline();
      children.push_back(make_node("decorator", std::move(deco)));
    }
    if (at_name("def")) {
      children.push_back(parse_funcdef(std::nullopt));
    } else if (at_name("class")) {
      children.push_back(parse_classdef());
    } else if (at_name("async") && at_name("def", 1)) {
      Node async_kw = keyword("async");
      children.push_back(parse_funcdef(std::move(async_kw)));
    } else {
      fail("expected definition after decorator");
    }
    return make_node("decorated_definition", std::move(children));
  }

  Node parse_funcdef(std::optional<Node> async_kw) {
    std::vector<Node> children;
    if (async_kw) children.push_back(std::move(*async_kw));
    children.push_back(keyword("def"));
    children.push_back(name_leaf(leaf::kName));
    children.push_back(parse_parameters());
    if (at_op("->")) {
      children.push_back(op_leaf("->"));
      children.push_back(make_node("type", {parse_test()}));
    }
    children.push_back(op_leaf(":"));
    children.push_back(parse_block());
    return make_node("function_definition", std::move(children));
  }

  Node parse_parameters() {
    std::vector<Node> children;
    children.push_back(op_leaf("("));
    while (!at_op(")")) {
      children.push_back(parse_parameter(/*annotations=*/true));
      if (!at_op(",")) break;
      children.push_back(op_leaf(","));
    }
    children.push_back(op_leaf(")"));
    return make_node("parameters", std::move(children));
  }

  Node parse_parameter(bool annotations) {
    if (at_op("/")) return make_node("positional_separator", {op_leaf("/")});
    if (at_op("*") || at_op("**")) {
      bool dict = at_op("**");
      Node star = op_leaf(dict ? "**" : "*");
      if (!dict && (at_op(",") || at_op(")") || at_op(":"))) {
        return make_node("keyword_separator", {std::move(star)});
      }
      std::vector<Node> children;
      children.push_back(std::move(star));
      children.push_back(identifier());
      Node splat = make_node(dict ? "dictionary_splat_pattern" : "list_splat_pattern",
                             std::move(children));
      if (annotations && at_op(":")) {
        std::vector<Node> typed;
        typed.push_back(std::move(splat));
        typed.push_back(op_leaf(":"));
        typed.push_back(make_node("type", {parse_test()}));
        return make_node("typed_parameter", std::move(typed));
      }
      return splat;
    }
    std::vector<Node> children;
    children.push_back(identifier());
    bool typed = false;
    if (annotations && at_op(":")) {
      typed = true;
      children.push_back(op_leaf(":"));
      children.push_back(make_node("type", {parse_test()}));
    }
    if (at_op("=")) {
      children.push_back(op_leaf("="));
      children.push_back(parse_test());
      return make_node(typed ? "typed_default_parameter" : "default_parameter",
                       std::move(children));
    }
    if (typed) return make_node("typed_parameter", std::move(children));
    return std::move(children.front());
  }

  Node parse_classdef() {
    std::vector<Node> children;
    children.push_back(keyword("class"));
    children.push_back(name_leaf(leaf::kName));
    if (at_op("(")) children.push_back(parse_argument_list());
    children.push_back(op_leaf(":"));
    children.push_back(parse_block());
    return make_node("class_definition", std::move(children));
  }

  Node parse_if() {
    std::vector<Node> children;
    children.push_back(keyword("if"));
    children.push_back(parse_namedexpr_test());
    children.push_back(op_leaf(":"));
    children.push_back(parse_block());
    while (at_name("elif")) {
      std::vector<Node> clause;
      clause.push_back(keyword("elif"));
      clause.push_back(parse_namedexpr_test());
      clause.push_back(op_leaf(":"));
      clause.push_back(parse_block());
      children.push_back(make_node("elif_clause", std::move(clause)));
    }
    if (at_name("else")) children.push_back(parse_else());
    return make_node("if_statement", std::move(children));
  }

  Node parse_else() {
    std::vector<Node> clause;
    clause.push_back(keyword("else"));
    clause.push_back(op_leaf(":"));
    clause.push_back(parse_block());
    return make_node("else_clause", std::move(clause));
  }

  Node parse_while() {
    std::vector<Node> children;
    children.push_back(keyword("while"));
    children.push_back(parse_namedexpr_test());
    children.push_back(op_leaf(":"));
    children.push_back(parse_block());
    if (at_name("else")) children.push_back(parse_else());
    return make_node("while_statement", std::move(children));
  }

  Node parse_for(std::optional<Node> async_kw) {
    std::vector<Node> children;
    if (async_kw) children.push_back(std::move(*async_kw));
    children.push_back(keyword("for"));
    children.push_back(parse_exprlist());
    children.push_back(keyword("in"));
    children.push_back(parse_testlist_star_expr());
    children.push_back(op_leaf(":"));
    children.push_back(parse_block());
    if (at_name("else")) children.push_back(parse_else());
    return make_node("for_statement", std::move(children));
  }

  Node parse_try() {
    std::vector<Node> children;
    children.push_back(keyword("try"));
    children.push_back(op_leaf(":"));
    children.push_back(parse_block());
    bool handled = false;
    while (at_name("except")) {
      handled = true;
      std::vector<Node> clause;
      clause.push_back(keyword("except"));
      if (at_op("*")) clause.push_back(op_leaf("*"));
      if (!at_op(":")) {
        clause.push_back(parse_test());
        if (at_name("as") || at_op(",")) {
          clause.push_back(at_op(",") ? op_leaf(",") : keyword("as"));
          clause.push_back(make_node("as_pattern_target", {identifier()}));
        }
      }
      clause.push_back(op_leaf(":"));
      clause.push_back(parse_block());
      children.push_back(make_node("except_clause", std::move(clause)));
    }
    if (handled && at_name("else")) children.push_back(parse_else());
    if (at_name("finally")) {
      handled = true;
      std::vector<Node> clause;
      clause.push_back(keyword("finally"));
      clause.push_back(op_leaf(":"));
      clause.push_back(parse_block());
      children.push_back(make_node("finally_clause", std::move(clause)));
    }
    if (!handled) fail("try without except or finally");
    return make_node("try_statement", std::move(children));
  }

  Node parse_with(std::optional<Node> async_kw) {
    std::vector<Node> children;
    if (async_kw) children.push_back(std::move(*async_kw));
    children.push_back(keyword("with"));
    std::vector<Node> items;
    while (true) {
      std::vector<Node> item;
      item.push_back(parse_test());
      if (at_name("as")) {
        item.push_back(keyword("as"));
        item.push_back(parse_star_or_expr());
      }
      items.push_back(make_node("with_item", std::move(item)));
      if (!at_op(",")) break;
      items.push_back(op_leaf(","));
    }
    children.push_back(make_node("with_clause", std::move(items)));
    children.push_back(op_leaf(":"));
    children.push_back(parse_block());
    return make_node("with_statement", std::move(children));
  }

  Node parse_match() {
    std::vector<Node> children;
    children.push_back(keyword("match"));
    children.push_back(parse_testlist_star_expr());
    children.push_back(op_leaf(":"));
    if (!at(TokenKind::kNewline)) fail("expected newline after match");
    ++pos_;
    if (!at(TokenKind::kIndent)) fail("expected case block");
    ++pos_;
    std::vector<Node> cases;
    while (at_name("case")) {
      std::vector<Node> clause;
      clause.push_back(keyword("case"));
      clause.push_back(parse_case_pattern());
      if (at_name("if")) {
        clause.push_back(keyword("if"));
        clause.push_back(parse_namedexpr_test());
      }
      clause.push_back(op_leaf(":"));
      clause.push_back(parse_block());
      cases.push_back(make_node("case_clause", std::move(clause)));
      while (at(TokenKind::kNewline)) ++pos_;
    }
    if (cases.empty()) fail("match without case");
    if (at(TokenKind::kDedent)) ++pos_;
    children.push_back(make_node("block", std::move(cases)));
    return make_node("match_statement", std::move(children));
  }

  Node parse_case_pattern() {
    std::vector<Node> parts;
    parts.push_back(parse_testlist_star_expr());
    while (at_name("as")) {
      parts.push_back(keyword("as"));
      parts.push_back(make_node("as_pattern_target", {identifier()}));
    }
    if (parts.size() == 1) return std::move(parts.front());
    return make_node("case_pattern", std::move(parts));
  }

  bool starts_print_argument(std::size_t ahead) const {
    const Token& t = peek(ahead);
    switch (t.kind) {
      case TokenKind::kNumber:
      case TokenKind::kString:
        return true;
      case TokenKind::kName: {
        std::string_view w = text(t);
        return !is_hard_keyword(w) || w == "not" || w == "lambda" || w == "None" ||
               w == "True" || w == "False";
      }
      case TokenKind::kOperator: {
        std::string_view op = text(t);
        return op == ">>" || op == "[" || op == "{" || op == "-" || op == "~";
      }
      default:
        return false;
    }
  }

  Node parse_small_statement() {
    if (at(TokenKind::kName)) {
      std::string_view word = text(peek());
      if (word == "pass") return make_node("pass_statement", {keyword("pass")});
      if (word == "break") return make_node("break_statement", {keyword("break")});
      if (word == "continue") return make_node("continue_statement", {keyword("continue")});
      if (word == "return") {
        std::vector<Node> children;
        children.push_back(keyword("return"));
        if (!at_statement_end()) children.push_back(parse_testlist_star_expr());
        return make_node("return_statement", std::move(children));
      }
      if (word == "raise") return parse_raise();
      if (word == "global" || word == "nonlocal") {
        std::vector<Node> children;
        children.push_back(keyword(word));
        children.push_back(identifier());
        while (at_op(",")) {
          children.push_back(op_leaf(","));
          children.push_back(identifier());
        }
        return make_node(word == "global" ? "global_statement" : "nonlocal_statement",
                         std::move(children));
      }
      if (word == "del") {
        std::vector<Node> children;
        children.push_back(keyword("del"));
        children.push_back(parse_exprlist());
        return make_node("delete_statement", std::move(children));
      }
      if (word == "assert") {
        std::vector<Node> children;
        children.push_back(keyword("assert"));
        children.push_back(parse_test());
        if (at_op(",")) {
          children.push_back(op_leaf(","));
          children.push_back(parse_test());
        }
        return make_node("assert_statement", std::move(children));
      }
      if (word == "import") return parse_import();
      if (word == "from") return parse_from_import();
      if (word == "print" && starts_print_argument(1)) return parse_print();
      if (word == "exec" && (peek(1).kind == TokenKind::kString ||
                             (peek(1).kind == TokenKind::kName && !is_hard_keyword(text(peek(1)))))) {
        return parse_exec();
      }
    }
    return parse_expression_statement();
  }

  bool at_statement_end() const {
    return at(TokenKind::kNewline) || at(TokenKind::kEnd) || at_op(";");
  }

  Node parse_raise() {
    std::vector<Node> children;
    children.push_back(keyword("raise"));
    if (!at_statement_end()) {
      children.push_back(parse_test());
      if (at_name("from")) {
        children.push_back(keyword("from"));
        children.push_back(parse_test());
      } else {
        while (at_op(",")) {
          children.push_back(op_leaf(","));
          children.push_back(parse_test());
        }
      }
    }
    return make_node("raise_statement", std::move(children));
  }

  Node parse_dotted_name() {
    std::vector<Node> parts;
    parts.push_back(name_leaf(leaf::kName));
    while (at_op(".")) {
      parts.push_back(op_leaf("."));
      parts.push_back(name_leaf(leaf::kName));
    }
    return make_node("dotted_name", std::move(parts));
  }

  Node parse_import() {
    std::vector<Node> children;
    children.push_back(keyword("import"));
    while (true) {
      Node dotted = parse_dotted_name();
      if (at_name("as")) {
        std::vector<Node> alias;
        alias.push_back(std::move(dotted));
        alias.push_back(keyword("as"));
        alias.push_back(name_leaf(leaf::kName));
        children.push_back(make_node("aliased_import", std::move(alias)));
      } else {
        children.push_back(std::move(dotted));
      }
      if (!at_op(",")) break;
      children.push_back(op_leaf(","));
    }
    return make_node("import_statement", std::move(children));
  }

  Node parse_from_import() {
    std::vector<Node> children;
    children.push_back(keyword("from"));
    while (at_op(".") || at_op("...")) children.push_back(op_leaf(text(peek())));
    if (!at_name("import")) children.push_back(parse_dotted_name());
    children.push_back(keyword("import"));
    if (at_op("*")) {
      children.push_back(op_leaf("*"));
      return make_node("import_from_statement", std::move(children));
    }
    bool parens = at_op("(");
    if (parens) children.push_back(op_leaf("("));
    while (at(TokenKind::kName)) {
      Node name = name_leaf(leaf::kName);
      if (at_name("as")) {
        std::vector<Node> alias;
        alias.push_back(std::move(name));
        alias.push_back(keyword("as"));
        alias.push_back(name_leaf(leaf::kName));
        children.push_back(make_node("aliased_import", std::move(alias)));
      } else {
        children.push_back(std::move(name));
      }
      if (!at_op(",")) break;
      children.push_back(op_leaf(","));
    }
    if (parens) children.push_back(op_leaf(")"));
    return make_node("import_from_statement", std::move(children));
  }

  Node parse_print() {
    std::vector<Node> children;
    children.push_back(keyword("print"));
    if (at_op(">>")) {
      std::vector<Node> chevron;
      chevron.push_back(op_leaf(">>"));
      chevron.push_back(parse_test());
      children.push_back(make_node("chevron", std::move(chevron)));
      if (at_op(",")) children.push_back(op_leaf(","));
    }
    while (!at_statement_end()) {
      children.push_back(parse_test());
      if (!at_op(",")) break;
      children.push_back(op_leaf(","));
    }
    return make_node("print_statement", std::move(children));
  }

  Node parse_exec() {
    std::vector<Node> children;
    children.push_back(keyword("exec"));
    children.push_back(parse_bitor());
    if (at_name("in")) {
      children.push_back(keyword("in"));
      children.push_back(parse_test());
      if (at_op(",")) {
        children.push_back(op_leaf(","));
        children.push_back(parse_test());
      }
    }
    return make_node("exec_statement", std::move(children));
  }

  bool at_augmented_operator() const {
    static const std::array<std::string_view, 13> ops = {
        "+=", "-=", "*=", "/=", "//=", "%=", "**=", ">>=", "<<=", "&=", "^=", "|=", "@="};
    const Token& t = peek();
    return t.kind == TokenKind::kOperator &&
           std::find(ops.begin(), ops.end(), text(t)) != ops.end();
  }

  Node parse_expression_statement() {
    Node first = parse_testlist_star_expr();
    if (at_op(":")) {
      std::vector<Node> children;
      children.push_back(std::move(first));
      children.push_back(op_leaf(":"));
      children.push_back(make_node("type", {parse_test()}));
      if (at_op("=")) {
        children.push_back(op_leaf("="));
        children.push_back(parse_assignment_rhs());
      }
      return make_node("expression_statement", {make_node("assignment", std::move(children))});
    }
    if (at_augmented_operator()) {
      std::vector<Node> children;
      children.push_back(std::move(first));
      children.push_back(make_leaf(leaf::kOperator, toks_[pos_++]));
      children.push_back(at_name("yield") ? parse_yield() : parse_testlist_star_expr());
      return make_node("expression_statement",
                       {make_node("augmented_assignment", std::move(children))});
    }
    if (at_op("=")) {
      std::vector<Node> children;
      children.push_back(std::move(first));
      children.push_back(op_leaf("="));
      children.push_back(parse_assignment_rhs());
      return make_node("expression_statement", {make_node("assignment", std::move(children))});
    }
    return make_node("expression_statement", {std::move(first)});
  }

  // Right-hand side of `=`; chained assignments nest to the right.
  Node parse_assignment_rhs() {
    Node value = at_name("yield") ? parse_yield() : parse_testlist_star_expr();
    if (!at_op("=")) return value;
    std::vector<Node> children;
    children.push_back(std::move(value));
    children.push_back(op_leaf("="));
    children.push_back(parse_assignment_rhs());
    return make_node("assignment", std::move(children));
  }

  // ---- expressions ---------------------------------------------------------

  bool starts_expression() const {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::kName: {
        std::string_view w = text(t);
        return !is_hard_keyword(w) || w == "not" || w == "lambda" || w == "await" ||
               w == "None" || w == "True" || w == "False" || w == "yield";
      }
      case TokenKind::kNumber:
      case TokenKind::kString:
        return true;
      case TokenKind::kOperator: {
        std::string_view op = text(t);
        return op == "(" || op == "[" || op == "{" || op == "-" || op == "+" || op == "~" ||
               op == "*" || op == "..." || op == "**";
      }
      default:
        return false;
    }
  }

  Node parse_yield() {
    std::vector<Node> children;
    children.push_back(keyword("yield"));
    if (at_name("from")) {
      children.push_back(keyword("from"));
      children.push_back(parse_test());
    } else if (starts_expression() && !at_op("**")) {
      children.push_back(parse_testlist_star_expr());
    }
    return make_node("yield", std::move(children));
  }

  // test (',' test)* with optional star expressions -> expression_list.
  Node parse_testlist_star_expr() {
    Node first = parse_star_or_namedexpr();
    if (!at_op(",")) return first;
    std::vector<Node> items;
    items.push_back(std::move(first));
    while (at_op(",")) {
      items.push_back(op_leaf(","));
      if (!starts_expression() || at_op("**")) break;
      items.push_back(parse_star_or_namedexpr());
    }
    return make_node("expression_list", std::move(items));
  }

  // Targets of for/del: bitwise-level expressions, so `in` stays unconsumed.
  Node parse_exprlist() {
    Node first = parse_star_or_expr();
    if (!at_op(",")) return first;
    std::vector<Node> items;
    items.push_back(std::move(first));
    while (at_op(",")) {
      items.push_back(op_leaf(","));
      if (at_name("in") || at_op("=") || at_statement_end() || at_op(":")) break;
      items.push_back(parse_star_or_expr());
    }
    return make_node("pattern_list", std::move(items));
  }

  Node parse_star_or_expr() {
    if (at_op("*")) {
      std::vector<Node> children;
      children.push_back(op_leaf("*"));
      children.push_back(parse_bitor());
      return make_node("list_splat", std::move(children));
    }
    return parse_bitor();
  }

  Node parse_star_or_namedexpr() {
    if (at_op("*")) {
      std::vector<Node> children;
      children.push_back(op_leaf("*"));
      children.push_back(parse_bitor());
      return make_node("list_splat", std::move(children));
    }
    return parse_namedexpr_test();
  }

  Node parse_namedexpr_test() {
    Node value = parse_test();
    if (at_op(":=") && value.is_leaf && value.kind == leaf::kIdentifier) {
      std::vector<Node> children;
      children.push_back(std::move(value));
      children.push_back(op_leaf(":="));
      children.push_back(parse_test());
      return make_node("named_expression", std::move(children));
    }
    return value;
  }

  Node parse_test() {
    if (at_name("lambda")) return parse_lambda(/*nocond=*/false);
    Node body = parse_or_test();
    if (at_name("if")) {
      std::size_t save = pos_;
      std::vector<Node> children;
      children.push_back(std::move(body));
      children.push_back(keyword("if"));
      children.push_back(parse_or_test());
      if (!at_name("else")) {
        // `x for x in y if c` inside a comprehension; let the caller see `if`.
        pos_ = save;
        return std::move(children.front());
      }
      children.push_back(keyword("else"));
      children.push_back(parse_test());
      return make_node("conditional_expression", std::move(children));
    }
    return body;
  }

  Node parse_test_nocond() {
    if (at_name("lambda")) return parse_lambda(/*nocond=*/true);
    return parse_or_test();
  }

  Node parse_lambda(bool nocond) {
    std::vector<Node> children;
    children.push_back(keyword("lambda"));
    if (!at_op(":")) {
      std::vector<Node> params;
      while (!at_op(":")) {
        params.push_back(parse_parameter(/*annotations=*/false));
        if (!at_op(",")) break;
        params.push_back(op_leaf(","));
      }
      children.push_back(make_node("lambda_parameters", std::move(params)));
    }
    children.push_back(op_leaf(":"));
    children.push_back(nocond ? parse_test_nocond() : parse_test());
    return make_node("lambda", std::move(children));
  }

  Node binary(std::string_view kind, Node left, Node op, Node right) {
    std::vector<Node> children;
    children.push_back(std::move(left));
    children.push_back(std::move(op));
    children.push_back(std::move(right));
    return make_node(kind, std::move(children));
  }

  Node parse_or_test() {
    Node left = parse_and_test();
    while (at_name("or")) {
      Node op = keyword("or");
      left = binary("boolean_operator", std::move(left), std::move(op), parse_and_test());
    }
    return left;
  }

  Node parse_and_test() {
    Node left = parse_not_test();
    while (at_name("and")) {
      Node op = keyword("and");
      left = binary("boolean_operator", std::move(left), std::move(op), parse_not_test());
    }
    return left;
  }

  Node parse_not_test() {
    if (at_name("not")) {
      std::vector<Node> children;
      children.push_back(keyword("not"));
      children.push_back(parse_not_test());
      return make_node("not_operator", std::move(children));
    }
    return parse_comparison();
  }

  bool at_comparison_operator() const {
    const Token& t = peek();
    if (t.kind == TokenKind::kOperator) {
      std::string_view op = text(t);
      return op == "<" || op == ">" || op == "==" || op == ">=" || op == "<=" || op == "!=" ||
             op == "<>";
    }
    return at_name("in") || at_name("is") || (at_name("not") && at_name("in", 1));
  }

  Node parse_comparison() {
    Node first = parse_bitor();
    if (!at_comparison_operator()) return first;
    std::vector<Node> children;
    children.push_back(std::move(first));
    while (at_comparison_operator()) {
      if (at_name("not")) {
        children.push_back(keyword("not"));
        children.push_back(keyword("in"));
      } else if (at_name("is")) {
        children.push_back(keyword("is"));
        if (at_name("not")) children.push_back(keyword("not"));
      } else if (at_name("in")) {
        children.push_back(keyword("in"));
      } else {
        children.push_back(make_leaf(leaf::kOperator, toks_[pos_++]));
      }
      children.push_back(parse_bitor());
    }
    return make_node("comparison_operator", std::move(children));
  }

  template <typename Next>
  Node parse_left_assoc(std::initializer_list<std::string_view> ops, Next next) {
    Node left = (this->*next)();
    while (true) {
      const Token& t = peek();
      if (t.kind != TokenKind::kOperator) break;
      std::string_view op = text(t);
      if (std::find(ops.begin(), ops.end(), op) == ops.end()) break;
      Node op_node = make_leaf(leaf::kOperator, toks_[pos_++]);
      left = binary("binary_operator", std::move(left), std::move(op_node), (this->*next)());
    }
    return left;
  }

  Node parse_bitor() { return parse_left_assoc({"|"}, &PythonParser::parse_bitxor); }
  Node parse_bitxor() { return parse_left_assoc({"^"}, &PythonParser::parse_bitand); }
  Node parse_bitand() { return parse_left_assoc({"&"}, &PythonParser::parse_shift); }
  Node parse_shift() { return parse_left_assoc({"<<", ">>"}, &PythonParser::parse_arith); }
  Node parse_arith() { return parse_left_assoc({"+", "-"}, &PythonParser::parse_term); }
  Node parse_term() {
    return parse_left_assoc({"*", "/", "//", "%", "@"}, &PythonParser::parse_factor);
  }

  Node parse_factor() {
    if (at_op("+") || at_op("-") || at_op("~")) {
      std::vector<Node> children;
      children.push_back(make_leaf(leaf::kOperator, toks_[pos_++]));
      children.push_back(parse_factor());
      return make_node("unary_operator", std::move(children));
    }
    return parse_power();
  }

  Node parse_power() {
    Node base = [&] {
      if (at_name("await") && !at_op("=", 1)) {
        std::vector<Node> children;
        children.push_back(keyword("await"));
        children.push_back(parse_atom_expr());
        return make_node("await", std::move(children));
      }
      return parse_atom_expr();
    }();
    if (at_op("**")) {
      Node op = op_leaf("**");
      return binary("binary_operator", std::move(base), std::move(op), parse_factor());
    }
    return base;
  }

  Node parse_atom_expr() {
    Node node = parse_atom();
    while (true) {
      if (at_op("(")) {
        std::vector<Node> children;
        children.push_back(std::move(node));
        children.push_back(parse_argument_list());
        node = make_node("call", std::move(children));
      } else if (at_op("[")) {
        std::vector<Node> children;
        children.push_back(std::move(node));
        children.push_back(op_leaf("["));
        while (true) {
          children.push_back(parse_subscript_item());
          if (!at_op(",")) break;
          children.push_back(op_leaf(","));
          if (at_op("]")) break;
        }
        children.push_back(op_leaf("]"));
        node = make_node("subscript", std::move(children));
      } else if (at_op(".")) {
        std::vector<Node> children;
        children.push_back(std::move(node));
        children.push_back(op_leaf("."));
        children.push_back(name_leaf(leaf::kName));
        node = make_node("attribute", std::move(children));
      } else {
        return node;
      }
    }
  }

  Node parse_subscript_item() {
    std::vector<Node> parts;
    if (!at_op(":")) {
      Node first = parse_star_or_namedexpr();
      if (!at_op(":")) return first;
      parts.push_back(std::move(first));
    }
    parts.push_back(op_leaf(":"));
    if (!at_op(":") && !at_op("]") && !at_op(",")) parts.push_back(parse_test());
    if (at_op(":")) {
      parts.push_back(op_leaf(":"));
      if (!at_op("]") && !at_op(",")) parts.push_back(parse_test());
    }
    return make_node("slice", std::move(parts));
  }

  Node parse_argument_list() {
    std::vector<Node> children;
    children.push_back(op_leaf("("));
    while (!at_op(")")) {
      if (at_op("*") || at_op("**")) {
        bool dict = at_op("**");
        std::vector<Node> splat;
        splat.push_back(op_leaf(dict ? "**" : "*"));
        splat.push_back(parse_test());
        children.push_back(make_node(dict ? "dictionary_splat" : "list_splat", std::move(splat)));
      } else if (at(TokenKind::kName) && at_op("=", 1)) {
        std::vector<Node> kw;
        kw.push_back(name_leaf(leaf::kName));
        kw.push_back(op_leaf("="));
        kw.push_back(parse_test());
        children.push_back(make_node("keyword_argument", std::move(kw)));
      } else {
        Node value = parse_namedexpr_test();
        if (at_comprehension_for()) {
          std::vector<Node> gen;
          gen.push_back(std::move(value));
          parse_comprehension_clauses(gen);
          value = make_node("generator_expression", std::move(gen));
        }
        children.push_back(std::move(value));
      }
      if (!at_op(",")) break;
      children.push_back(op_leaf(","));
    }
    children.push_back(op_leaf(")"));
    return make_node("argument_list", std::move(children));
  }

  bool at_comprehension_for() const {
    return at_name("for") || (at_name("async") && at_name("for", 1));
  }

  void parse_comprehension_clauses(std::vector<Node>& out) {
    while (true) {
      if (at_comprehension_for()) {
        std::vector<Node> clause;
        if (at_name("async")) clause.push_back(keyword("async"));
        clause.push_back(keyword("for"));
        clause.push_back(parse_exprlist());
        clause.push_back(keyword("in"));
        clause.push_back(parse_or_test());
        out.push_back(make_node("for_in_clause", std::move(clause)));
      } else if (at_name("if")) {
        std::vector<Node> clause;
        clause.push_back(keyword("if"));
        clause.push_back(parse_test_nocond());
        out.push_back(make_node("if_clause", std::move(clause)));
      } else {
        return;
      }
    }
  }

  Node parse_atom() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::kName: {
        std::string_view w = text(t);
        if (w == "True") return make_leaf(leaf::kTrue, toks_[pos_++]);
        if (w == "False") return make_leaf(leaf::kFalse, toks_[pos_++]);
        if (w == "None") return make_leaf(leaf::kNone, toks_[pos_++]);
        return identifier();
      }
      case TokenKind::kNumber: {
        std::string_view num = text(t);
        bool hex = num.size() > 1 && (num[1] == 'x' || num[1] == 'X');
        bool is_float = num.find('.') != std::string_view::npos ||
                        (!hex && num.find_first_of("eEjJ") != std::string_view::npos);
        return make_leaf(is_float ? leaf::kFloat : leaf::kInteger, toks_[pos_++]);
      }
      case TokenKind::kString: {
        Node first = parse_string();
        if (!at(TokenKind::kString)) return first;
        std::vector<Node> parts;
        parts.push_back(std::move(first));
        while (at(TokenKind::kString)) parts.push_back(parse_string());
        return make_node("concatenated_string", std::move(parts));
      }
      case TokenKind::kOperator: {
        std::string_view op = text(t);
        if (op == "(") return parse_paren();
        if (op == "[") return parse_list();
        if (op == "{") return parse_brace();
        if (op == "...") return make_leaf("ellipsis", toks_[pos_++]);
        break;
      }
      default:
        break;
    }
    fail("expected expression");
  }

  Node parse_paren() {
    std::vector<Node> children;
    children.push_back(op_leaf("("));
    if (at_op(")")) {
      children.push_back(op_leaf(")"));
      return make_node("tuple", std::move(children));
    }
    if (at_name("yield")) {
      children.push_back(parse_yield());
      children.push_back(op_leaf(")"));
      return make_node("parenthesized_expression", std::move(children));
    }
    children.push_back(parse_star_or_namedexpr());
    if (at_comprehension_for()) {
      parse_comprehension_clauses(children);
      children.push_back(op_leaf(")"));
      return make_node("generator_expression", std::move(children));
    }
    if (!at_op(",")) {
      children.push_back(op_leaf(")"));
      return make_node("parenthesized_expression", std::move(children));
    }
    while (at_op(",")) {
      children.push_back(op_leaf(","));
      if (at_op(")")) break;
      children.push_back(parse_star_or_namedexpr());
    }
    children.push_back(op_leaf(")"));
    return make_node("tuple", std::move(children));
  }

  Node parse_list() {
    std::vector<Node> children;
    children.push_back(op_leaf("["));
    if (!at_op("]")) {
      children.push_back(parse_star_or_namedexpr());
      if (at_comprehension_for()) {
        parse_comprehension_clauses(children);
        children.push_back(op_leaf("]"));
        return make_node("list_comprehension", std::move(children));
      }
      while (at_op(",")) {
        children.push_back(op_leaf(","));
        if (at_op("]")) break;
        children.push_back(parse_star_or_namedexpr());
      }
    }
    children.push_back(op_leaf("]"));
    return make_node("list", std::move(children));
  }

  Node parse_dict_item() {
    if (at_op("**")) {
      std::vector<Node> splat;
      splat.push_back(op_leaf("**"));
      splat.push_back(parse_bitor());
      return make_node("dictionary_splat", std::move(splat));
    }
    std::vector<Node> pair;
    pair.push_back(parse_test());
    pair.push_back(op_leaf(":"));
    pair.push_back(parse_test());
    return make_node("pair", std::move(pair));
  }

  Node parse_brace() {
    std::vector<Node> children;
    children.push_back(op_leaf("{"));
    if (at_op("}")) {
      children.push_back(op_leaf("}"));
      return make_node("dictionary", std::move(children));
    }
    bool is_dict = at_op("**");
    if (!is_dict) {
      std::size_t save = pos_;
      Node first = parse_star_or_namedexpr();
      is_dict = at_op(":");
      pos_ = save;
      (void)first;
    }
    if (is_dict) {
      children.push_back(parse_dict_item());
      if (at_comprehension_for()) {
        parse_comprehension_clauses(children);
        children.push_back(op_leaf("}"));
        return make_node("dictionary_comprehension", std::move(children));
      }
      while (at_op(",")) {
        children.push_back(op_leaf(","));
        if (at_op("}")) break;
        children.push_back(parse_dict_item());
      }
      children.push_back(op_leaf("}"));
      return make_node("dictionary", std::move(children));
    }
    children.push_back(parse_star_or_namedexpr());
    if (at_comprehension_for()) {
      parse_comprehension_clauses(children);
      children.push_back(op_leaf("}"));
      return make_node("set_comprehension", std::move(children));
    }
    while (at_op(",")) {
      children.push_back(op_leaf(","));
      if (at_op("}")) break;
      children.push_back(parse_star_or_namedexpr());
    }
    children.push_back(op_leaf("}"));
    return make_node("set", std::move(children));
  }

  // ---- strings -------------------------------------------------------------

  Node parse_string() {
    const Token& t = toks_[pos_++];
    std::string_view body = text(t);
    std::size_t prefix_len = 0;
    while (prefix_len < body.size() && body[prefix_len] != '\'' && body[prefix_len] != '"') {
      ++prefix_len;
    }
    std::string_view prefix = body.substr(0, prefix_len);
    bool is_format = prefix.find_first_of("fF") != std::string_view::npos;
    if (!is_format) return make_leaf(leaf::kString, t);

    char quote = body[prefix_len];
    std::size_t quote_len =
        body.size() >= prefix_len + 6 && body[prefix_len + 1] == quote && body[prefix_len + 2] == quote
            ? 3
            : 1;
    std::size_t content_begin = t.start + prefix_len + quote_len;
    std::size_t content_end = t.end - quote_len;
    std::vector<Node> parts;
    std::size_t tail = split_format_string(content_begin, content_end, t.start, parts);
    parts.push_back(Node{leaf::kStringContent, {tail, t.end}, {}, true});
    return make_node("string", std::move(parts));
  }

  // Splits [begin, end) into literal pieces and {expression} interpolations.
  // `literal_start` marks where the pending literal piece begins; the start
  // of the trailing literal piece is returned for the caller to close.
  std::size_t split_format_string(std::size_t begin, std::size_t end, std::size_t literal_start,
                           std::vector<Node>& parts) {
    std::size_t i = begin;
    while (i < end) {
      char c = src_[i];
      if (c == '\\') {
        i += 2;
        continue;
      }
      if ((c == '{' || c == '}') && i + 1 < end && src_[i + 1] == c) {
        i += 2;
        continue;
      }
      if (c != '{') {
        ++i;
        continue;
      }
      if (i > literal_start) parts.push_back(Node{leaf::kStringContent, {literal_start, i}, {}, true});
      std::size_t close = 0;
      parts.push_back(parse_interpolation(i, end, close));
      i = close;
      literal_start = i;
    }
    return literal_start;
  }

  Node parse_interpolation(std::size_t open, std::size_t limit, std::size_t& after) {
    // Find the end of the expression part.
    std::size_t i = open + 1;
    int depth = 0;
    std::size_t expr_end = std::string::npos;
    while (i < limit) {
      char c = src_[i];
      if (c == '\'' || c == '"') {
        std::size_t j = i + 1;
        while (j < limit && src_[j] != c) j += (src_[j] == '\\') ? 2 : 1;
        i = j + 1;
        continue;
      }
      if (c == '(' || c == '[' || c == '{') {
        ++depth;
      } else if ((c == ')' || c == ']' || c == '}') && depth > 0) {
        --depth;
      } else if (depth == 0) {
        if (c == '}' || c == ':' || (c == '!' && i + 1 < limit && src_[i + 1] != '=')) {
          expr_end = i;
          break;
        }
        if (c == '=' && i + 1 < limit && src_[i + 1] != '=' &&
            std::string_view("=!<>").find(src_[i - 1]) == std::string_view::npos) {
          expr_end = i;
          break;
        }
      }
      ++i;
    }
    if (expr_end == std::string::npos) throw ParseError("python: unterminated f-string field", open);

    std::vector<Node> children;
    children.push_back(Node{leaf::kOperator, {open, open + 1}, {}, true});
    LexResult sub = lex_python(src_, open + 1, expr_end, /*expression_mode=*/true);
    PythonParser inner(src_, sub.tokens);
    children.push_back(inner.parse_interpolation_expression());

    i = expr_end;
    if (src_[i] == '=') {
      children.push_back(Node{leaf::kOperator, {i, i + 1}, {}, true});
      ++i;
      while (i < limit && src_[i] == ' ') ++i;
    }
    if (i < limit && src_[i] == '!') {
      std::size_t start = i;
      ++i;
      while (i < limit && std::isalpha(static_cast<unsigned char>(src_[i]))) ++i;
      children.push_back(Node{leaf::kStringContent, {start, i}, {}, true});
    }
    if (i < limit && src_[i] == ':') {
      children.push_back(Node{leaf::kOperator, {i, i + 1}, {}, true});
      ++i;
      // Format spec: literal text with optional nested fields, up to '}'.
      std::size_t spec_start = i;
      int nested = 0;
      std::size_t spec_end = i;
      while (spec_end < limit) {
        if (src_[spec_end] == '{') ++nested;
        if (src_[spec_end] == '}') {
          if (nested == 0) break;
          --nested;
        }
        ++spec_end;
      }
      std::vector<Node> spec_parts;
      std::size_t tail = split_format_string(spec_start, spec_end, spec_start, spec_parts);
      if (spec_end > tail) spec_parts.push_back(Node{leaf::kStringContent, {tail, spec_end}, {}, true});
      for (auto& part : spec_parts) children.push_back(std::move(part));
      i = spec_end;
    }
    if (i >= limit || src_[i] != '}') throw ParseError("python: expected '}' in f-string", i);
    children.push_back(Node{leaf::kOperator, {i, i + 1}, {}, true});
    after = i + 1;
    return make_node("interpolation", std::move(children));
  }

  std::string_view src_;
  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Node parse_python(std::string_view source, const LexResult& lexed) {
  PythonParser parser(source, lexed.tokens);
  return parser.parse_module();
}

}  // namespace varcat::detail
