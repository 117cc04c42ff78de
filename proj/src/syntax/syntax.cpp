#include <algorithm>
#include <array>
#include <cctype>

#include "parser_support.hpp"

namespace varcat {
namespace {

constexpr std::array<std::string_view, 35> kPythonKeywords = {
    "False", "None",   "True",    "and",      "as",       "assert", "async",
    "await", "break",  "class",   "continue", "def",      "del",    "elif",
    "else",  "except", "finally", "for",      "from",     "global", "if",
    "import", "in",    "is",      "lambda",   "nonlocal", "not",    "or",
    "pass",  "raise",  "return",  "try",      "while",    "with",   "yield"};

constexpr std::array<std::string_view, 54> kJavaKeywords = {
    "abstract", "assert",     "boolean",   "break",     "byte",      "case",
    "catch",    "char",       "class",     "const",     "continue",  "default",
    "do",       "double",     "else",      "enum",      "extends",   "final",
    "finally",  "float",      "for",       "goto",      "if",        "implements",
    "import",   "instanceof", "int",       "interface", "long",      "native",
    "new",      "package",    "private",   "protected", "public",    "return",
    "short",    "static",     "strictfp",  "super",     "switch",    "synchronized",
    "this",     "throw",      "throws",    "transient", "try",       "void",
    "volatile", "while",      "true",      "false",     "null",      "_"};

bool is_function_node(const Node& node, Language language) {
  if (language == Language::kPython) {
    if (node.kind == "function_definition") return true;
    return node.kind == "decorated_definition" && node.children.back().kind == "function_definition";
  }
  return node.kind == "method_declaration" || node.kind == "constructor_declaration";
}

// Path from a class declaration to its body, or empty if `node` is no class.
std::vector<std::size_t> class_body_path(const Node& node, Language language) {
  if (language == Language::kPython) {
    if (node.kind == "class_definition") return {node.children.size() - 1};
    if (node.kind == "decorated_definition" && node.children.back().kind == "class_definition") {
      return {node.children.size() - 1, node.children.back().children.size() - 1};
    }
    return {};
  }
  if (node.kind == "class_declaration" || node.kind == "interface_declaration" ||
      node.kind == "enum_declaration" || node.kind == "record_declaration") {
    return {node.children.size() - 1};
  }
  return {};
}

// Breadth-first over the top level and then nested class bodies, so a
// top-level function wins over methods.
std::optional<std::vector<std::size_t>> find_function(const Node& root, Language language) {
  std::vector<std::pair<const Node*, std::vector<std::size_t>>> frontier = {{&root, {}}};
  while (!frontier.empty()) {
    std::vector<std::pair<const Node*, std::vector<std::size_t>>> next;
    for (const auto& [container, path] : frontier) {
      for (std::size_t i = 0; i < container->children.size(); ++i) {
        const Node& child = container->children[i];
        std::vector<std::size_t> child_path = path;
        child_path.push_back(i);
        if (is_function_node(child, language)) return child_path;
        std::vector<std::size_t> rel = class_body_path(child, language);
        if (rel.empty()) continue;
        const Node* body = &child;
        for (std::size_t j : rel) {
          body = &body->children[j];
          child_path.push_back(j);
        }
        next.emplace_back(body, std::move(child_path));
      }
    }
    frontier = std::move(next);
  }
  return std::nullopt;
}

void collect_leaves(const Node& node, std::vector<const Node*>& out) {
  if (node.is_leaf) {
    out.push_back(&node);
    return;
  }
  for (const Node& child : node.children) collect_leaves(child, out);
}

bool is_ident_word(std::string_view word, bool allow_dollar) {
  if (word.empty()) return false;
  if (!detail::is_ident_start(static_cast<unsigned char>(word[0]), allow_dollar)) return false;
  return std::all_of(word.begin() + 1, word.end(), [&](char c) {
    return detail::is_ident_char(static_cast<unsigned char>(c), allow_dollar);
  });
}

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::optional<Language> parse_language(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "python" || lower == "py") return Language::kPython;
  if (lower == "java") return Language::kJava;
  return std::nullopt;
}

std::string_view language_name(Language language) {
  return language == Language::kPython ? "python" : "java";
}

std::string_view grammar_version() { return "python-rd 1.2, java-rd 1.1"; }

SyntaxTree::SyntaxTree(Language language, std::string source, Node root,
                       std::vector<ByteRange> comments, std::vector<std::size_t> function_path)
    : language_(language),
      source_(std::move(source)),
      root_(std::move(root)),
      comments_(std::move(comments)),
      function_path_(std::move(function_path)) {}

const Node& SyntaxTree::function() const {
  const Node* node = &root_;
  for (std::size_t i : function_path_) node = &node->children[i];
  return *node;
}

std::string_view SyntaxTree::text(const Node& node) const { return text(node.range); }

std::string_view SyntaxTree::text(const ByteRange& range) const {
  return std::string_view(source_).substr(range.start, range.size());
}

SyntaxTree parse(const CodeSample& sample) {
  Node root;
  std::vector<ByteRange> comments;
  if (sample.language == Language::kPython) {
    detail::LexResult lexed = detail::lex_python(sample.code, 0, sample.code.size(), false);
    root = detail::parse_python(sample.code, lexed);
    comments = std::move(lexed.comments);
  } else {
    detail::LexResult lexed = detail::lex_java(sample.code);
    root = detail::parse_java(sample.code, lexed);
    comments = std::move(lexed.comments);
  }
  std::optional<std::vector<std::size_t>> path = find_function(root, sample.language);
  if (!path) throw ParseError("no function definition", 0);
  return SyntaxTree(sample.language, sample.code, std::move(root), std::move(comments),
                    std::move(*path));
}

std::vector<const Node*> leaves(const Node& node) {
  std::vector<const Node*> out;
  collect_leaves(node, out);
  return out;
}

std::string reconstruct(const SyntaxTree& tree) {
  std::string out;
  std::size_t cursor = 0;
  std::string_view src = tree.source();
  for (const Node* leaf : leaves(tree.root())) {
    out.append(src.substr(cursor, leaf->range.start - cursor));
    out.append(tree.text(*leaf));
    cursor = leaf->range.end;
  }
  out.append(src.substr(cursor));
  return out;
}

bool is_reserved_word(std::string_view word, Language language) {
  if (language == Language::kPython) {
    return std::find(kPythonKeywords.begin(), kPythonKeywords.end(), word) != kPythonKeywords.end();
  }
  return std::find(kJavaKeywords.begin(), kJavaKeywords.end(), word) != kJavaKeywords.end();
}

bool is_valid_identifier(std::string_view word, Language language) {
  return is_ident_word(word, language == Language::kJava) && !is_reserved_word(word, language);
}

std::optional<NamingConvention> parse_convention(std::string_view name) {
  if (name == "snake_case" || name == "snake") return NamingConvention::kSnakeCase;
  if (name == "camelCase" || name == "camel_case" || name == "camel") {
    return NamingConvention::kCamelCase;
  }
  return std::nullopt;
}

std::string_view convention_name(NamingConvention convention) {
  return convention == NamingConvention::kSnakeCase ? "snake_case" : "camelCase";
}

bool is_compound(std::string_view name, NamingConvention convention) {
  if (convention == NamingConvention::kSnakeCase) {
    for (std::size_t i = 1; i + 1 < name.size(); ++i) {
      if (name[i] == '_' && is_alnum(name[i - 1]) && is_alnum(name[i + 1])) return true;
    }
    return false;
  }
  for (std::size_t i = 1; i < name.size(); ++i) {
    if (std::isupper(static_cast<unsigned char>(name[i])) &&
        std::islower(static_cast<unsigned char>(name[i - 1]))) {
      return true;
    }
  }
  return false;
}

}  // namespace varcat
