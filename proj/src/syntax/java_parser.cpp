// Recursive-descent parser for Java method snippets and compilation units.
// Declaration/expression and cast/parenthesis ambiguities are resolved by
// bounded speculation: try the declaration reading, rewind on failure.

#include <algorithm>
#include <array>
#include <optional>
#include <string>

#include "parser_support.hpp"

namespace varcat::detail {
namespace {

constexpr std::array<std::string_view, 8> kPrimitiveTypes = {
    "byte", "short", "int", "long", "char", "float", "double", "boolean"};

constexpr std::array<std::string_view, 14> kModifierWords = {
    "public", "protected", "private",  "static",   "final",    "abstract", "native",
    "synchronized", "transient", "volatile", "strictfp", "default", "sealed", "non-sealed"};

bool is_primitive(std::string_view word) {
  return std::find(kPrimitiveTypes.begin(), kPrimitiveTypes.end(), word) != kPrimitiveTypes.end();
}

bool is_modifier(std::string_view word) {
  return std::find(kModifierWords.begin(), kModifierWords.end(), word) != kModifierWords.end();
}

class JavaParser {
 public:
  JavaParser(std::string_view source, const std::vector<Token>& tokens)
      : src_(source), toks_(tokens) {}

  Node parse_program() {
    std::vector<Node> body;
    if (at_name("package")) body.push_back(parse_package());
    while (at_name("import")) body.push_back(parse_import());
    while (!at(TokenKind::kEnd)) {
      if (at_op(";")) {
        body.push_back(op_leaf(";"));
        continue;
      }
      body.push_back(parse_member_declaration());
    }
    return Node{"program", {0, src_.size()}, std::move(body), false};
  }

 private:
  // ---- token helpers -------------------------------------------------------

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  std::string_view text(const Token& t) const { return src_.substr(t.start, t.end - t.start); }
  bool at(TokenKind kind, std::size_t ahead = 0) const { return peek(ahead).kind == kind; }
  bool at_op(std::string_view op, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::kOperator && text(t) == op;
  }
  bool at_name(std::string_view word, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::kName && text(t) == word;
  }
  bool at_identifier(std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::kName && !is_reserved_word(text(t), Language::kJava);
  }
  bool adjacent(std::size_t ahead) const { return peek(ahead).start == peek(ahead - 1).end; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("java: " + what, peek().start);
  }

  Node op_leaf(std::string_view op) {
    if (!at_op(op)) fail("expected '" + std::string(op) + "'");
    return make_leaf(leaf::kOperator, toks_[pos_++]);
  }
  Node keyword(std::string_view word) {
    if (!at_name(word)) fail("expected '" + std::string(word) + "'");
    return make_leaf(leaf::kKeyword, toks_[pos_++]);
  }
  Node identifier(std::string_view kind = leaf::kIdentifier) {
    if (!at_identifier()) fail("expected identifier");
    return make_leaf(kind, toks_[pos_++]);
  }

  // Speculative parse: returns nullopt and rewinds when `fn` throws.
  template <typename Fn>
  std::optional<Node> attempt(Fn fn) {
    std::size_t save = pos_;
    try {
      return fn();
    } catch (const ParseError&) {
      pos_ = save;
      return std::nullopt;
    }
  }

  // Joins adjacent '>' / '=' tokens: returns the operator spelling and the
  // number of tokens it spans, or an empty view.
  std::pair<std::string_view, std::size_t> greater_operator() const {
    if (!at_op(">")) return {{}, 0};
    std::size_t n = 1;
    while (n < 3 && at_op(">", n) && adjacent(n)) ++n;
    bool eq = at_op("=", n) && adjacent(n);
    static constexpr std::array<std::string_view, 3> plain = {">", ">>", ">>>"};
    static constexpr std::array<std::string_view, 3> assign = {">=", ">>=", ">>>="};
    if (eq) return {assign[n - 1], n + 1};
    return {plain[n - 1], n};
  }

  Node take_operator(std::size_t count) {
    Token merged{TokenKind::kOperator, peek().start, peek(count - 1).end};
    pos_ += count;
    return make_leaf(leaf::kOperator, merged);
  }

  // ---- declarations --------------------------------------------------------

  Node parse_package() {
    std::vector<Node> children;
    children.push_back(keyword("package"));
    children.push_back(parse_qualified_name());
    children.push_back(op_leaf(";"));
    return make_node("package_declaration", std::move(children));
  }

  Node parse_import() {
    std::vector<Node> children;
    children.push_back(keyword("import"));
    if (at_name("static")) children.push_back(keyword("static"));
    children.push_back(parse_qualified_name());
    if (at_op(".") && at_op("*", 1)) {
      children.push_back(op_leaf("."));
      children.push_back(op_leaf("*"));
    }
    children.push_back(op_leaf(";"));
    return make_node("import_declaration", std::move(children));
  }

  Node parse_qualified_name() {
    std::vector<Node> parts;
    parts.push_back(identifier(leaf::kName));
    while (at_op(".") && at_identifier(1)) {
      parts.push_back(op_leaf("."));
      parts.push_back(identifier(leaf::kName));
    }
    return make_node("scoped_identifier", std::move(parts));
  }

  Node parse_annotation() {
    std::vector<Node> children;
    children.push_back(op_leaf("@"));
    children.push_back(parse_qualified_name());
    if (!at_op("(")) return make_node("marker_annotation", std::move(children));
    std::vector<Node> args;
    args.push_back(op_leaf("("));
    while (!at_op(")")) {
      if (at_identifier() && at_op("=", 1)) {
        std::vector<Node> pair;
        pair.push_back(identifier(leaf::kName));
        pair.push_back(op_leaf("="));
        pair.push_back(parse_element_value());
        args.push_back(make_node("element_value_pair", std::move(pair)));
      } else {
        args.push_back(parse_element_value());
      }
      if (!at_op(",")) break;
      args.push_back(op_leaf(","));
    }
    args.push_back(op_leaf(")"));
    children.push_back(make_node("annotation_argument_list", std::move(args)));
    return make_node("annotation", std::move(children));
  }

  Node parse_element_value() {
    if (at_op("@")) return parse_annotation();
    if (at_op("{")) {
      std::vector<Node> children;
      children.push_back(op_leaf("{"));
      while (!at_op("}")) {
        children.push_back(parse_element_value());
        if (!at_op(",")) break;
        children.push_back(op_leaf(","));
      }
      children.push_back(op_leaf("}"));
      return make_node("element_value_array_initializer", std::move(children));
    }
    return parse_ternary();
  }

  bool at_modifier() const {
    if (at_op("@") && !at_name("interface", 1)) return true;
    if (!at(TokenKind::kName)) return false;
    std::string_view w = text(peek());
    if (w == "non") return at_op("-", 1) && at_name("sealed", 2);
    return is_modifier(w);
  }

  std::optional<Node> parse_modifiers() {
    std::vector<Node> mods;
    while (at_modifier()) {
      if (at_op("@")) {
        mods.push_back(parse_annotation());
      } else if (at_name("non")) {
        mods.push_back(take_operator(3));
      } else {
        mods.push_back(make_leaf(leaf::kKeyword, toks_[pos_++]));
      }
    }
    if (mods.empty()) return std::nullopt;
    return make_node("modifiers", std::move(mods));
  }

  bool at_type_declaration_keyword() const {
    return at_name("class") || at_name("interface") || (at_op("@") && at_name("interface", 1)) ||
           (at_name("enum") && at_identifier(1)) ||
           (at_name("record") && at_identifier(1) && (at_op("(", 2) || at_op("<", 2)));
  }

  // A member of a class body, or a top-level declaration.
  Node parse_member_declaration() {
    if (at_op("{") || (at_name("static") && at_op("{", 1))) {
      std::vector<Node> children;
      if (at_name("static")) children.push_back(keyword("static"));
      children.push_back(parse_block());
      return make_node(children.size() == 2 ? "static_initializer" : "block", std::move(children));
    }
    std::optional<Node> mods = parse_modifiers();
    if (at_type_declaration_keyword()) return parse_type_declaration(std::move(mods));

    std::vector<Node> children;
    if (mods) children.push_back(std::move(*mods));
    if (at_op("<")) children.push_back(parse_type_parameters());
    if (at_identifier() && at_op("(", 1)) {
      children.push_back(identifier(leaf::kName));
      children.push_back(parse_formal_parameters());
      if (at_name("throws")) children.push_back(parse_throws());
      children.push_back(parse_block("constructor_body"));
      return make_node("constructor_declaration", std::move(children));
    }
    children.push_back(parse_type());
    if (at_identifier() && at_op("(", 1)) {
      children.push_back(identifier(leaf::kName));
      children.push_back(parse_formal_parameters());
      if (at_op("[") || at_op("@")) children.push_back(parse_dimensions());
      if (at_name("throws")) children.push_back(parse_throws());
      if (at_name("default")) {
        children.push_back(keyword("default"));
        children.push_back(parse_element_value());
      }
      if (at_op(";")) {
        children.push_back(op_leaf(";"));
      } else {
        children.push_back(parse_block());
      }
      return make_node("method_declaration", std::move(children));
    }
    children.push_back(parse_variable_declarator());
    while (at_op(",")) {
      children.push_back(op_leaf(","));
      children.push_back(parse_variable_declarator());
    }
    children.push_back(op_leaf(";"));
    return make_node("field_declaration", std::move(children));
  }

  Node parse_type_declaration(std::optional<Node> mods) {
    std::vector<Node> children;
    if (mods) children.push_back(std::move(*mods));
    if (at_op("@")) {
      children.push_back(op_leaf("@"));
      children.push_back(keyword("interface"));
      children.push_back(identifier(leaf::kTypeIdentifier));
      children.push_back(parse_class_body());
      return make_node("annotation_type_declaration", std::move(children));
    }
    std::string_view word = text(peek());
    std::string_view kind = word == "class"       ? "class_declaration"
                            : word == "interface" ? "interface_declaration"
                            : word == "enum"      ? "enum_declaration"
                                                  : "record_declaration";
    children.push_back(make_leaf(leaf::kKeyword, toks_[pos_++]));
    children.push_back(identifier(leaf::kTypeIdentifier));
    if (at_op("<")) children.push_back(parse_type_parameters());
    if (word == "record") children.push_back(parse_formal_parameters());
    while (at_name("extends") || at_name("implements") || at_name("permits")) {
      std::vector<Node> clause;
      clause.push_back(make_leaf(leaf::kKeyword, toks_[pos_++]));
      clause.push_back(parse_type());
      while (at_op(",")) {
        clause.push_back(op_leaf(","));
        clause.push_back(parse_type());
      }
      children.push_back(make_node("super_clause", std::move(clause)));
    }
    children.push_back(word == "enum" ? parse_enum_body() : parse_class_body());
    return make_node(kind, std::move(children));
  }

  Node parse_class_body() {
    std::vector<Node> children;
    children.push_back(op_leaf("{"));
    while (!at_op("}")) {
      if (at(TokenKind::kEnd)) fail("unterminated class body");
      if (at_op(";")) {
        children.push_back(op_leaf(";"));
        continue;
      }
      children.push_back(parse_member_declaration());
    }
    children.push_back(op_leaf("}"));
    return make_node("class_body", std::move(children));
  }

  Node parse_enum_body() {
    std::vector<Node> children;
    children.push_back(op_leaf("{"));
    while (!at_op("}") && !at_op(";")) {
      std::vector<Node> constant;
      if (std::optional<Node> mods = parse_modifiers()) constant.push_back(std::move(*mods));
      constant.push_back(identifier(leaf::kName));
      if (at_op("(")) constant.push_back(parse_arguments());
      if (at_op("{")) constant.push_back(parse_class_body());
      children.push_back(make_node("enum_constant", std::move(constant)));
      if (!at_op(",")) break;
      children.push_back(op_leaf(","));
    }
    if (at_op(";")) {
      children.push_back(op_leaf(";"));
      while (!at_op("}")) {
        if (at(TokenKind::kEnd)) fail("unterminated enum body");
        if (at_op(";")) {
          children.push_back(op_leaf(";"));
          continue;
        }
        children.push_back(parse_member_declaration());
      }
    }
    children.push_back(op_leaf("}"));
    return make_node("enum_body", std::move(children));
  }

  Node parse_type_parameters() {
    std::vector<Node> children;
    children.push_back(op_leaf("<"));
    while (true) {
      std::vector<Node> param;
      while (at_op("@")) param.push_back(parse_annotation());
      param.push_back(identifier(leaf::kTypeIdentifier));
      if (at_name("extends")) {
        param.push_back(keyword("extends"));
        param.push_back(parse_type());
        while (at_op("&")) {
          param.push_back(op_leaf("&"));
          param.push_back(parse_type());
        }
      }
      children.push_back(make_node("type_parameter", std::move(param)));
      if (!at_op(",")) break;
      children.push_back(op_leaf(","));
    }
    children.push_back(op_leaf(">"));
    return make_node("type_parameters", std::move(children));
  }

  Node parse_throws() {
    std::vector<Node> children;
    children.push_back(keyword("throws"));
    children.push_back(parse_type());
    while (at_op(",")) {
      children.push_back(op_leaf(","));
      children.push_back(parse_type());
    }
    return make_node("throws", std::move(children));
  }

  Node parse_formal_parameters() {
    std::vector<Node> children;
    children.push_back(op_leaf("("));
    while (!at_op(")")) {
      children.push_back(parse_formal_parameter());
      if (!at_op(",")) break;
      children.push_back(op_leaf(","));
    }
    children.push_back(op_leaf(")"));
    return make_node("formal_parameters", std::move(children));
  }

  Node parse_formal_parameter() {
    std::vector<Node> children;
    if (std::optional<Node> mods = parse_modifiers()) children.push_back(std::move(*mods));
    children.push_back(parse_type());
    bool spread = false;
    while (at_op("@")) children.push_back(parse_annotation());
    if (at_op("...")) {
      spread = true;
      children.push_back(op_leaf("..."));
    }
    if (at_name("this")) {
      children.push_back(make_leaf(leaf::kThis, toks_[pos_++]));
      return make_node("receiver_parameter", std::move(children));
    }
    children.push_back(identifier());
    if (at_op("[")) children.push_back(parse_dimensions());
    return make_node(spread ? "spread_parameter" : "formal_parameter", std::move(children));
  }

  // ---- types ---------------------------------------------------------------

  Node parse_type() {
    std::vector<Node> annotations;
    while (at_op("@")) annotations.push_back(parse_annotation());
    Node base = [&] {
      if (at(TokenKind::kName) && is_primitive(text(peek()))) {
        std::string_view w = text(peek());
        std::string_view kind = (w == "float" || w == "double") ? "floating_point_type"
                                : w == "boolean"                ? "boolean_type"
                                                                : "integral_type";
        return make_node(kind, {make_leaf(leaf::kKeyword, toks_[pos_++])});
      }
      if (at_name("void")) return make_node("void_type", {keyword("void")});
      return parse_class_type();
    }();
    if (!annotations.empty()) {
      annotations.push_back(std::move(base));
      base = make_node("annotated_type", std::move(annotations));
    }
    if ((at_op("[") && at_op("]", 1)) || (at_op("@") && dims_follow_annotation())) {
      std::vector<Node> children;
      children.push_back(std::move(base));
      children.push_back(parse_dimensions());
      return make_node("array_type", std::move(children));
    }
    return base;
  }

  bool dims_follow_annotation() const {
    std::size_t i = 0;
    while (at_op("@", i) && at(TokenKind::kName, i + 1)) i += 2;
    return at_op("[", i) && at_op("]", i + 1);
  }

  Node parse_class_type() {
    Node type = parse_simple_class_type();
    while (at_op(".") && (at_identifier(1) || at_op("@", 1))) {
      std::vector<Node> children;
      children.push_back(std::move(type));
      children.push_back(op_leaf("."));
      while (at_op("@")) children.push_back(parse_annotation());
      children.push_back(parse_simple_class_type());
      type = make_node("scoped_type_identifier", std::move(children));
    }
    return type;
  }

  Node parse_simple_class_type() {
    Node name = identifier(leaf::kTypeIdentifier);
    if (!at_op("<")) return name;
    std::vector<Node> children;
    children.push_back(std::move(name));
    children.push_back(parse_type_arguments());
    return make_node("generic_type", std::move(children));
  }

  Node parse_type_arguments() {
    std::vector<Node> children;
    children.push_back(op_leaf("<"));
    while (!at_op(">")) {
      std::vector<Node> annotations;
      while (at_op("@")) annotations.push_back(parse_annotation());
      if (at_op("?")) {
        std::vector<Node> wildcard = std::move(annotations);
        wildcard.push_back(op_leaf("?"));
        if (at_name("extends") || at_name("super")) {
          wildcard.push_back(make_leaf(leaf::kKeyword, toks_[pos_++]));
          wildcard.push_back(parse_type());
        }
        children.push_back(make_node("wildcard", std::move(wildcard)));
      } else {
        Node type = parse_type();
        if (!annotations.empty()) {
          annotations.push_back(std::move(type));
          type = make_node("annotated_type", std::move(annotations));
        }
        children.push_back(std::move(type));
      }
      if (!at_op(",")) break;
      children.push_back(op_leaf(","));
    }
    children.push_back(op_leaf(">"));
    return make_node("type_arguments", std::move(children));
  }

  Node parse_dimensions() {
    std::vector<Node> children;
    while (true) {
      while (at_op("@")) children.push_back(parse_annotation());
      if (!(at_op("[") && at_op("]", 1))) break;
      children.push_back(op_leaf("["));
      children.push_back(op_leaf("]"));
    }
    if (children.empty()) fail("expected dimensions");
    return make_node("dimensions", std::move(children));
  }

  // ---- statements ----------------------------------------------------------

  Node parse_block(std::string_view kind = "block") {
    std::vector<Node> children;
    children.push_back(op_leaf("{"));
    while (!at_op("}")) {
      if (at(TokenKind::kEnd)) fail("unterminated block");
      children.push_back(parse_block_statement());
    }
    children.push_back(op_leaf("}"));
    return make_node(kind, std::move(children));
  }

  bool at_local_type_declaration() const {
    std::size_t i = 0;
    while (at(TokenKind::kName, i) &&
           (text(peek(i)) == "final" || text(peek(i)) == "abstract" || text(peek(i)) == "static" ||
            text(peek(i)) == "strictfp" || text(peek(i)) == "sealed")) {
      ++i;
    }
    if (at_name("class", i) || at_name("interface", i)) return true;
    if (at_name("enum", i) && at_identifier(i + 1) && at_op("{", i + 2)) return true;
    return at_name("record", i) && at_identifier(i + 1) && (at_op("(", i + 2) || at_op("<", i + 2));
  }

  Node parse_block_statement() {
    if (at_local_type_declaration()) {
      std::optional<Node> mods = parse_modifiers();
      return parse_type_declaration(std::move(mods));
    }
    if (at_op("@") || at_name("final")) {
      std::size_t save = pos_;
      std::optional<Node> mods = parse_modifiers();
      if (at_type_declaration_keyword()) return parse_type_declaration(std::move(mods));
      pos_ = save;
      return parse_local_variable_declaration(/*require_semicolon=*/true);
    }
    if (std::optional<Node> decl = attempt([&] { return parse_local_declaration_strict(); })) {
      return std::move(*decl);
    }
    return parse_statement();
  }

  // Succeeds only if the tokens read as `Type name (= | ; | , | [ | :)`.
  Node parse_local_declaration_strict() {
    std::size_t save = pos_;
    parse_type();
    if (!at_identifier()) fail("not a declaration");
    if (!(at_op("=", 1) || at_op(";", 1) || at_op(",", 1) || at_op("[", 1))) {
      fail("not a declaration");
    }
    pos_ = save;
    return parse_local_variable_declaration(/*require_semicolon=*/true);
  }

  Node parse_local_variable_declaration(bool require_semicolon) {
    std::vector<Node> children;
    if (std::optional<Node> mods = parse_modifiers()) children.push_back(std::move(*mods));
    children.push_back(parse_type());
    children.push_back(parse_variable_declarator());
    while (at_op(",")) {
      children.push_back(op_leaf(","));
      children.push_back(parse_variable_declarator());
    }
    if (require_semicolon) children.push_back(op_leaf(";"));
    return make_node("local_variable_declaration", std::move(children));
  }

  Node parse_variable_declarator() {
    std::vector<Node> children;
    children.push_back(identifier());
    if (at_op("[") || at_op("@")) children.push_back(parse_dimensions());
    if (at_op("=")) {
      children.push_back(op_leaf("="));
      children.push_back(at_op("{") ? parse_array_initializer() : parse_expression());
    }
    return make_node("variable_declarator", std::move(children));
  }

  Node parse_array_initializer() {
    std::vector<Node> children;
    children.push_back(op_leaf("{"));
    while (!at_op("}")) {
      children.push_back(at_op("{") ? parse_array_initializer() : parse_expression());
      if (!at_op(",")) break;
      children.push_back(op_leaf(","));
    }
    children.push_back(op_leaf("}"));
    return make_node("array_initializer", std::move(children));
  }

  Node parse_parenthesized() {
    std::vector<Node> children;
    children.push_back(op_leaf("("));
    children.push_back(parse_expression());
    children.push_back(op_leaf(")"));
    return make_node("parenthesized_expression", std::move(children));
  }

  Node parse_statement() {
    if (at_op("{")) return parse_block();
    if (at_op(";")) return op_leaf(";");
    if (at(TokenKind::kName)) {
      std::string_view w = text(peek());
      if (w == "if") return parse_if();
      if (w == "while") {
        std::vector<Node> children;
        children.push_back(keyword("while"));
        children.push_back(parse_parenthesized());
        children.push_back(parse_statement());
        return make_node("while_statement", std::move(children));
      }
      if (w == "do") {
        std::vector<Node> children;
        children.push_back(keyword("do"));
        children.push_back(parse_statement());
        children.push_back(keyword("while"));
        children.push_back(parse_parenthesized());
        children.push_back(op_leaf(";"));
        return make_node("do_statement", std::move(children));
      }
      if (w == "for") return parse_for();
      if (w == "try") return parse_try();
      if (w == "switch") return parse_switch("switch_statement");
      if (w == "return") return parse_keyword_statement("return_statement", "return", true);
      if (w == "throw") return parse_keyword_statement("throw_statement", "throw", true);
      if (w == "break" || w == "continue") {
        std::vector<Node> children;
        children.push_back(keyword(w));
        if (at_identifier()) children.push_back(identifier(leaf::kName));
        children.push_back(op_leaf(";"));
        return make_node(w == "break" ? "break_statement" : "continue_statement",
                         std::move(children));
      }
      if (w == "synchronized" && at_op("(", 1)) {
        std::vector<Node> children;
        children.push_back(keyword("synchronized"));
        children.push_back(parse_parenthesized());
        children.push_back(parse_block());
        return make_node("synchronized_statement", std::move(children));
      }
      if (w == "assert") {
        std::vector<Node> children;
        children.push_back(keyword("assert"));
        children.push_back(parse_expression());
        if (at_op(":")) {
          children.push_back(op_leaf(":"));
          children.push_back(parse_expression());
        }
        children.push_back(op_leaf(";"));
        return make_node("assert_statement", std::move(children));
      }
      if (w == "yield" && !at_op("=", 1) && !at_op("(", 1) && !at_op(".", 1) && !at_op("[", 1)) {
        return parse_keyword_statement("yield_statement", "yield", false);
      }
      if (at_identifier() && at_op(":", 1)) {
        std::vector<Node> children;
        children.push_back(identifier(leaf::kName));
        children.push_back(op_leaf(":"));
        children.push_back(parse_statement());
        return make_node("labeled_statement", std::move(children));
      }
    }
    std::vector<Node> children;
    children.push_back(parse_expression());
    children.push_back(op_leaf(";"));
    return make_node("expression_statement", std::move(children));
  }

  Node parse_keyword_statement(std::string_view kind, std::string_view word, bool optional_value) {
    std::vector<Node> children;
    children.push_back(keyword(word));
    if (!optional_value || !at_op(";")) children.push_back(parse_expression());
    children.push_back(op_leaf(";"));
    return make_node(kind, std::move(children));
  }

  Node parse_if() {
    std::vector<Node> children;
    children.push_back(keyword("if"));
    children.push_back(parse_parenthesized());
    children.push_back(parse_statement());
    if (at_name("else")) {
      children.push_back(keyword("else"));
      children.push_back(parse_statement());
    }
    return make_node("if_statement", std::move(children));
  }

  Node parse_for() {
    std::vector<Node> children;
    children.push_back(keyword("for"));
    children.push_back(op_leaf("("));
    std::optional<Node> header = attempt([&] {
      std::vector<Node> parts;
      if (std::optional<Node> mods = parse_modifiers()) parts.push_back(std::move(*mods));
      parts.push_back(parse_type());
      parts.push_back(identifier());
      if (at_op("[")) parts.push_back(parse_dimensions());
      parts.push_back(op_leaf(":"));
      return make_node("enhanced_for_header", std::move(parts));
    });
    if (header) {
      for (auto& part : header->children) children.push_back(std::move(part));
      children.push_back(parse_expression());
      children.push_back(op_leaf(")"));
      children.push_back(parse_statement());
      return make_node("enhanced_for_statement", std::move(children));
    }
    if (!at_op(";")) {
      std::optional<Node> decl = attempt([&] {
        std::size_t save = pos_;
        if (!at_name("final") && !at_op("@")) {
          parse_type();
          if (!at_identifier()) fail("not a declaration");
          pos_ = save;
        }
        return parse_local_variable_declaration(/*require_semicolon=*/false);
      });
      if (decl) {
        children.push_back(std::move(*decl));
      } else {
        children.push_back(parse_expression());
        while (at_op(",")) {
          children.push_back(op_leaf(","));
          children.push_back(parse_expression());
        }
      }
    }
    children.push_back(op_leaf(";"));
    if (!at_op(";")) children.push_back(parse_expression());
    children.push_back(op_leaf(";"));
    while (!at_op(")")) {
      children.push_back(parse_expression());
      if (!at_op(",")) break;
      children.push_back(op_leaf(","));
    }
    children.push_back(op_leaf(")"));
    children.push_back(parse_statement());
    return make_node("for_statement", std::move(children));
  }

  Node parse_try() {
    std::vector<Node> children;
    children.push_back(keyword("try"));
    bool resources = at_op("(");
    if (resources) {
      std::vector<Node> spec;
      spec.push_back(op_leaf("("));
      while (!at_op(")")) {
        spec.push_back(parse_resource());
        if (!at_op(";")) break;
        spec.push_back(op_leaf(";"));
      }
      spec.push_back(op_leaf(")"));
      children.push_back(make_node("resource_specification", std::move(spec)));
    }
    children.push_back(parse_block());
    bool handled = resources;
    while (at_name("catch")) {
      handled = true;
      std::vector<Node> clause;
      clause.push_back(keyword("catch"));
      clause.push_back(op_leaf("("));
      std::vector<Node> param;
      if (std::optional<Node> mods = parse_modifiers()) param.push_back(std::move(*mods));
      std::vector<Node> types;
      types.push_back(parse_type());
      while (at_op("|")) {
        types.push_back(op_leaf("|"));
        types.push_back(parse_type());
      }
      param.push_back(make_node("catch_type", std::move(types)));
      param.push_back(identifier());
      clause.push_back(make_node("catch_formal_parameter", std::move(param)));
      clause.push_back(op_leaf(")"));
      clause.push_back(parse_block());
      children.push_back(make_node("catch_clause", std::move(clause)));
    }
    if (at_name("finally")) {
      handled = true;
      std::vector<Node> clause;
      clause.push_back(keyword("finally"));
      clause.push_back(parse_block());
      children.push_back(make_node("finally_clause", std::move(clause)));
    }
    if (!handled) fail("try without catch or finally");
    return make_node(resources ? "try_with_resources_statement" : "try_statement",
                     std::move(children));
  }

  Node parse_resource() {
    std::optional<Node> decl = attempt([&] {
      std::vector<Node> parts;
      if (std::optional<Node> mods = parse_modifiers()) parts.push_back(std::move(*mods));
      parts.push_back(parse_type());
      parts.push_back(identifier());
      parts.push_back(op_leaf("="));
      parts.push_back(parse_expression());
      return make_node("resource", std::move(parts));
    });
    if (decl) return std::move(*decl);
    return make_node("resource", {parse_expression()});
  }

  Node parse_switch(std::string_view kind) {
    std::vector<Node> children;
    children.push_back(keyword("switch"));
    children.push_back(parse_parenthesized());
    std::vector<Node> body;
    body.push_back(op_leaf("{"));
    while (!at_op("}")) {
      if (at(TokenKind::kEnd)) fail("unterminated switch");
      std::vector<Node> group;
      group.push_back(parse_switch_label());
      if (at_op("->")) {
        group.push_back(op_leaf("->"));
        if (at_op("{")) {
          group.push_back(parse_block());
        } else if (at_name("throw")) {
          group.push_back(parse_keyword_statement("throw_statement", "throw", true));
        } else {
          std::vector<Node> stmt;
          stmt.push_back(parse_expression());
          stmt.push_back(op_leaf(";"));
          group.push_back(make_node("expression_statement", std::move(stmt)));
        }
        body.push_back(make_node("switch_rule", std::move(group)));
        continue;
      }
      group.push_back(op_leaf(":"));
      while (at_name("case") || at_name("default")) {
        if (at_name("default") && !at_op(":", 1) && !at_op("->", 1)) break;
        group.push_back(parse_switch_label());
        group.push_back(op_leaf(":"));
      }
      while (!at_op("}") && !at_name("case") &&
             !(at_name("default") && (at_op(":", 1) || at_op("->", 1)))) {
        if (at(TokenKind::kEnd)) fail("unterminated switch");
        group.push_back(parse_block_statement());
      }
      body.push_back(make_node("switch_block_statement_group", std::move(group)));
    }
    body.push_back(op_leaf("}"));
    children.push_back(make_node("switch_block", std::move(body)));
    return make_node(kind, std::move(children));
  }

  Node parse_switch_label() {
    std::vector<Node> children;
    if (at_name("default")) {
      children.push_back(keyword("default"));
      return make_node("switch_label", std::move(children));
    }
    children.push_back(keyword("case"));
    children.push_back(parse_ternary());
    while (at_op(",")) {
      children.push_back(op_leaf(","));
      children.push_back(parse_ternary());
    }
    return make_node("switch_label", std::move(children));
  }

  // ---- expressions ---------------------------------------------------------

  bool at_lambda() const {
    if (at_identifier() && at_op("->", 1)) return true;
    if (!at_op("(")) return false;
    int depth = 0;
    for (std::size_t i = 0;; ++i) {
      const Token& t = peek(i);
      if (t.kind == TokenKind::kEnd) return false;
      if (t.kind != TokenKind::kOperator) continue;
      std::string_view op = text(t);
      if (op == "(") ++depth;
      if (op == ")" && --depth == 0) return at_op("->", i + 1);
    }
  }

  Node parse_expression() {
    if (at_lambda()) return parse_lambda();
    Node left = parse_ternary();
    std::string_view op;
    std::size_t count = 0;
    if (at_op(">")) {
      auto [spelling, n] = greater_operator();
      if (spelling == ">>=" || spelling == ">>>=") {
        op = spelling;
        count = n;
      }
    } else if (at(TokenKind::kOperator)) {
      static constexpr std::array<std::string_view, 11> assign_ops = {
          "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="};
      std::string_view t = text(peek());
      if (std::find(assign_ops.begin(), assign_ops.end(), t) != assign_ops.end()) {
        op = t;
        count = 1;
      }
    }
    if (count == 0) return left;
    std::vector<Node> children;
    children.push_back(std::move(left));
    children.push_back(take_operator(count));
    children.push_back(parse_expression());
    return make_node("assignment_expression", std::move(children));
  }

  Node parse_lambda() {
    std::vector<Node> children;
    if (at_identifier()) {
      children.push_back(identifier());
    } else {
      // `(a, b)` binds inferred parameters; anything typed is a formal list.
      std::size_t i = 1;
      bool inferred = true;
      while (!at_op(")", i)) {
        if (!at_identifier(i)) {
          inferred = false;
          break;
        }
        ++i;
        if (at_op(",", i)) {
          ++i;
        } else if (!at_op(")", i)) {
          inferred = false;
          break;
        }
      }
      if (inferred && !at_op(")", 1)) {
        std::vector<Node> params;
        params.push_back(op_leaf("("));
        while (!at_op(")")) {
          params.push_back(identifier());
          if (!at_op(",")) break;
          params.push_back(op_leaf(","));
        }
        params.push_back(op_leaf(")"));
        children.push_back(make_node("inferred_parameters", std::move(params)));
      } else {
        children.push_back(parse_formal_parameters());
      }
    }
    children.push_back(op_leaf("->"));
    children.push_back(at_op("{") ? parse_block() : parse_expression());
    return make_node("lambda_expression", std::move(children));
  }

  Node parse_ternary() {
    Node condition = parse_binary(0);
    if (!at_op("?")) return condition;
    std::vector<Node> children;
    children.push_back(std::move(condition));
    children.push_back(op_leaf("?"));
    children.push_back(parse_expression());
    children.push_back(op_leaf(":"));
    children.push_back(at_lambda() ? parse_lambda() : parse_ternary());
    return make_node("ternary_expression", std::move(children));
  }

  // Binary precedence levels, lowest first.
  static constexpr std::size_t kLevels = 10;

  // Returns the operator spelling at the cursor if it belongs to `level`.
  std::pair<std::string_view, std::size_t> binary_operator_at(std::size_t level) const {
    static const std::array<std::vector<std::string_view>, kLevels> table = {{
        {"||"},
        {"&&"},
        {"|"},
        {"^"},
        {"&"},
        {"==", "!="},
        {"<", "<=", ">", ">="},
        {"<<", ">>", ">>>"},
        {"+", "-"},
        {"*", "/", "%"},
    }};
    if (!at(TokenKind::kOperator)) return {{}, 0};
    std::string_view spelling = text(peek());
    std::size_t count = 1;
    if (spelling == ">") std::tie(spelling, count) = greater_operator();
    const auto& ops = table[level];
    if (std::find(ops.begin(), ops.end(), spelling) == ops.end()) return {{}, 0};
    return {spelling, count};
  }

  Node parse_binary(std::size_t level) {
    if (level == kLevels) return parse_unary();
    Node left = parse_binary(level + 1);
    while (true) {
      if (level == 6 && at_name("instanceof")) {
        std::vector<Node> children;
        children.push_back(std::move(left));
        children.push_back(keyword("instanceof"));
        if (at_name("final")) children.push_back(keyword("final"));
        Node type = parse_type();
        if (at_identifier()) {
          std::vector<Node> pattern;
          pattern.push_back(std::move(type));
          pattern.push_back(identifier());
          children.push_back(make_node("type_pattern", std::move(pattern)));
        } else {
          children.push_back(std::move(type));
        }
        left = make_node("instanceof_expression", std::move(children));
        continue;
      }
      auto [spelling, count] = binary_operator_at(level);
      if (count == 0) return left;
      std::vector<Node> children;
      children.push_back(std::move(left));
      children.push_back(take_operator(count));
      children.push_back(parse_binary(level + 1));
      left = make_node("binary_expression", std::move(children));
    }
  }

  bool starts_cast_operand() const {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::kName: {
        std::string_view w = text(t);
        return !is_reserved_word(w, Language::kJava) || w == "this" || w == "super" ||
               w == "new" || w == "true" || w == "false" || w == "null" || w == "switch" ||
               is_primitive(w);
      }
      case TokenKind::kNumber:
      case TokenKind::kString:
      case TokenKind::kCharacter:
        return true;
      case TokenKind::kOperator: {
        std::string_view op = text(t);
        return op == "(" || op == "!" || op == "~";
      }
      default:
        return false;
    }
  }

  Node parse_unary() {
    if (at_op("+") || at_op("-") || at_op("!") || at_op("~")) {
      std::vector<Node> children;
      children.push_back(make_leaf(leaf::kOperator, toks_[pos_++]));
      children.push_back(parse_unary());
      return make_node("unary_expression", std::move(children));
    }
    if (at_op("++") || at_op("--")) {
      std::vector<Node> children;
      children.push_back(make_leaf(leaf::kOperator, toks_[pos_++]));
      children.push_back(parse_unary());
      return make_node("update_expression", std::move(children));
    }
    if (at_op("(") && !at_lambda()) {
      std::optional<Node> cast = attempt([&] {
        std::vector<Node> children;
        children.push_back(op_leaf("("));
        Node type = parse_type();
        bool primitive = type.kind == "integral_type" || type.kind == "floating_point_type" ||
                         type.kind == "boolean_type";
        children.push_back(std::move(type));
        while (at_op("&")) {
          children.push_back(op_leaf("&"));
          children.push_back(parse_type());
        }
        children.push_back(op_leaf(")"));
        if (primitive) {
          children.push_back(parse_unary());
        } else {
          if (!starts_cast_operand()) fail("not a cast");
          children.push_back(at_lambda() ? parse_lambda() : parse_unary());
        }
        return make_node("cast_expression", std::move(children));
      });
      if (cast) return std::move(*cast);
    }
    Node operand = parse_primary();
    while (at_op("++") || at_op("--")) {
      std::vector<Node> children;
      children.push_back(std::move(operand));
      children.push_back(make_leaf(leaf::kOperator, toks_[pos_++]));
      operand = make_node("update_expression", std::move(children));
    }
    return operand;
  }

  Node parse_arguments() {
    std::vector<Node> children;
    children.push_back(op_leaf("("));
    while (!at_op(")")) {
      children.push_back(parse_expression());
      if (!at_op(",")) break;
      children.push_back(op_leaf(","));
    }
    children.push_back(op_leaf(")"));
    return make_node("argument_list", std::move(children));
  }

  Node literal() {
    const Token& t = peek();
    std::string_view s = text(t);
    if (t.kind == TokenKind::kString) return make_leaf(leaf::kString, toks_[pos_++]);
    if (t.kind == TokenKind::kCharacter) return make_leaf(leaf::kCharacter, toks_[pos_++]);
    bool hex = s.size() > 1 && (s[1] == 'x' || s[1] == 'X');
    bool is_float = hex ? s.find_first_of("pP") != std::string_view::npos
                        : s.find_first_of(".eEfFdD") != std::string_view::npos;
    return make_leaf(is_float ? leaf::kFloat : leaf::kInteger, toks_[pos_++]);
  }

  Node parse_primary() {
    Node node = parse_primary_prefix();
    while (true) {
      if (at_op(".")) {
        std::vector<Node> children;
        children.push_back(std::move(node));
        children.push_back(op_leaf("."));
        if (at_name("new")) {
          children.push_back(parse_creator());
          node = make_node("object_creation_expression", std::move(children));
          continue;
        }
        if (at_name("class")) {
          children.push_back(keyword("class"));
          node = make_node("class_literal", std::move(children));
          continue;
        }
        if (at_name("this") || at_name("super")) {
          bool is_this = at_name("this");
          children.push_back(make_leaf(is_this ? leaf::kThis : leaf::kSuper, toks_[pos_++]));
          if (at_op("(")) {
            children.push_back(parse_arguments());
            node = make_node("explicit_constructor_invocation", std::move(children));
          } else {
            node = make_node("field_access", std::move(children));
          }
          continue;
        }
        if (at_op("<")) children.push_back(parse_type_arguments());
        children.push_back(identifier(leaf::kName));
        if (at_op("(")) {
          children.push_back(parse_arguments());
          node = make_node("method_invocation", std::move(children));
        } else {
          node = make_node("field_access", std::move(children));
        }
      } else if (at_op("[") && at_op("]", 1)) {
        // `Foo[].class` or `Foo[]::new`
        std::vector<Node> children;
        children.push_back(std::move(node));
        children.push_back(parse_dimensions());
        node = make_node("array_type", std::move(children));
        if (!at_op(".") && !at_op("::")) fail("expected .class or ::");
      } else if (at_op("[")) {
        std::vector<Node> children;
        children.push_back(std::move(node));
        children.push_back(op_leaf("["));
        children.push_back(parse_expression());
        children.push_back(op_leaf("]"));
        node = make_node("array_access", std::move(children));
      } else if (at_op("::")) {
        std::vector<Node> children;
        children.push_back(std::move(node));
        children.push_back(op_leaf("::"));
        if (at_op("<")) children.push_back(parse_type_arguments());
        if (at_name("new")) {
          children.push_back(keyword("new"));
        } else {
          children.push_back(identifier(leaf::kName));
        }
        node = make_node("method_reference", std::move(children));
      } else {
        return node;
      }
    }
  }

  Node parse_primary_prefix() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::kNumber:
      case TokenKind::kString:
      case TokenKind::kCharacter:
        return literal();
      case TokenKind::kOperator:
        if (at_op("(")) return parse_parenthesized();
        fail("expected expression");
      case TokenKind::kName:
        break;
      default:
        fail("expected expression");
    }
    std::string_view w = text(t);
    if (w == "true") return make_leaf(leaf::kTrue, toks_[pos_++]);
    if (w == "false") return make_leaf(leaf::kFalse, toks_[pos_++]);
    if (w == "null") return make_leaf(leaf::kNull, toks_[pos_++]);
    if (w == "this" || w == "super") {
      Node self = make_leaf(w == "this" ? leaf::kThis : leaf::kSuper, toks_[pos_++]);
      if (at_op("(")) {
        std::vector<Node> children;
        children.push_back(std::move(self));
        children.push_back(parse_arguments());
        return make_node("explicit_constructor_invocation", std::move(children));
      }
      return self;
    }
    if (w == "new") return parse_creator();
    if (w == "switch") return parse_switch("switch_expression");
    if (is_primitive(w) || w == "void") {
      // int.class, int[].class, int[]::new
      Node type = parse_type();
      std::vector<Node> children;
      children.push_back(std::move(type));
      if (at_op("::")) {
        children.push_back(op_leaf("::"));
        children.push_back(keyword("new"));
        return make_node("method_reference", std::move(children));
      }
      children.push_back(op_leaf("."));
      children.push_back(keyword("class"));
      return make_node("class_literal", std::move(children));
    }
    if (at_identifier() && at_op("(", 1)) {
      std::vector<Node> children;
      children.push_back(identifier(leaf::kName));
      children.push_back(parse_arguments());
      return make_node("method_invocation", std::move(children));
    }
    return identifier();
  }

  // `new` ... ; yields an object or array creation expression.
  Node parse_creator() {
    std::vector<Node> children;
    children.push_back(keyword("new"));
    if (at_op("<")) children.push_back(parse_type_arguments());
    std::vector<Node> annotations;
    while (at_op("@")) annotations.push_back(parse_annotation());
    Node type = [&] {
      if (at(TokenKind::kName) && is_primitive(text(peek()))) {
        std::string_view w = text(peek());
        std::string_view kind = (w == "float" || w == "double") ? "floating_point_type"
                                : w == "boolean"                ? "boolean_type"
                                                                : "integral_type";
        return make_node(kind, {make_leaf(leaf::kKeyword, toks_[pos_++])});
      }
      return parse_class_type();
    }();
    for (auto& a : annotations) children.push_back(std::move(a));
    children.push_back(std::move(type));
    if (at_op("[")) {
      while (at_op("[") && !at_op("]", 1)) {
        std::vector<Node> dim;
        dim.push_back(op_leaf("["));
        dim.push_back(parse_expression());
        dim.push_back(op_leaf("]"));
        children.push_back(make_node("dimensions_expr", std::move(dim)));
      }
      if (at_op("[")) children.push_back(parse_dimensions());
      if (at_op("{")) children.push_back(parse_array_initializer());
      return make_node("array_creation_expression", std::move(children));
    }
    children.push_back(parse_arguments());
    if (at_op("{")) children.push_back(parse_class_body());
    return make_node("object_creation_expression", std::move(children));
  }

  std::string_view src_;
  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Node parse_java(std::string_view source, const LexResult& lexed) {
  JavaParser parser(source, lexed.tokens);
  return parser.parse_program();
}

}  // namespace varcat::detail
