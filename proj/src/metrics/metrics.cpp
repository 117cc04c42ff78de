#include "varcat/metrics.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace varcat {
namespace {

using KindSet = std::unordered_set<std::string_view>;

struct Grammar {
  KindSet branches;
  KindSet control;
  KindSet expressions;
  KindSet literals;
};

const Grammar& python_tables() {
  static const Grammar g{
      {"if_statement", "elif_clause", "conditional_expression", "for_statement", "while_statement",
       "except_clause", "case_clause", "for_in_clause", "if_clause"},
      {"if_statement", "for_statement", "while_statement", "try_statement", "with_statement",
       "match_statement"},
      {"identifier", "integer", "float", "string", "concatenated_string", "true", "false", "none",
       "ellipsis", "binary_operator", "boolean_operator", "comparison_operator", "unary_operator",
       "not_operator", "conditional_expression", "lambda", "named_expression", "await", "call",
       "attribute", "subscript", "list", "tuple", "set", "dictionary", "list_comprehension",
       "set_comprehension", "dictionary_comprehension", "generator_expression",
       "parenthesized_expression"},
      {"integer", "float", "string", "concatenated_string", "true", "false", "none", "ellipsis"},
  };
  return g;
}

const Grammar& java_tables() {
  static const Grammar g{
      {"if_statement", "for_statement", "enhanced_for_statement", "while_statement",
       "do_statement", "ternary_expression", "catch_clause"},
      {"if_statement", "for_statement", "enhanced_for_statement", "while_statement",
       "do_statement", "switch_statement", "try_statement", "try_with_resources_statement",
       "synchronized_statement"},
      {"identifier", "integer", "float", "string", "character", "true", "false", "null", "this",
       "class_literal", "assignment_expression", "binary_expression", "unary_expression",
       "update_expression", "ternary_expression", "instanceof_expression", "lambda_expression",
       "cast_expression", "method_invocation", "field_access", "array_access",
       "object_creation_expression", "array_creation_expression", "method_reference",
       "parenthesized_expression", "switch_expression"},
      {"integer", "float", "string", "character", "true", "false", "null"},
  };
  return g;
}

const Grammar& tables(Language language) {
  return language == Language::kPython ? python_tables() : java_tables();
}

bool is_identifier_like(const Node& node) {
  return node.is_leaf && (node.kind == leaf::kIdentifier || node.kind == leaf::kName ||
                          node.kind == leaf::kTypeIdentifier);
}

// True if child `index` of `parent` is an identifier that declares a name
// rather than reading one.
bool is_declaring_identifier(const Node& parent, std::size_t index, Language language) {
  std::string_view k = parent.kind;
  if (language == Language::kPython) {
    if (k == "parameters" || k == "lambda_parameters" || k == "list_splat_pattern" ||
        k == "dictionary_splat_pattern" || k == "global_statement" ||
        k == "nonlocal_statement" || k == "as_pattern_target") {
      return true;
    }
    return index == 0 &&
           (k == "default_parameter" || k == "typed_parameter" || k == "typed_default_parameter");
  }
  if (k == "formal_parameter" || k == "spread_parameter" || k == "catch_formal_parameter" ||
      k == "inferred_parameters" || k == "type_pattern") {
    return true;
  }
  if (k == "variable_declarator" || k == "lambda_expression") return index == 0;
  if (k == "enhanced_for_statement" || (k == "resource" && parent.children.size() > 1)) {
    // first direct identifier child is the declared name
    for (std::size_t i = 0; i < parent.children.size(); ++i) {
      if (parent.children[i].kind == leaf::kIdentifier) return i == index;
    }
  }
  return false;
}

class FeatureWalker {
 public:
  FeatureWalker(const SyntaxTree& tree) : tree_(tree), g_(tables(tree.language())) {}

  FeatureVector run() {
    const Node& fn = tree_.function();
    walk(fn, 1, 0);
    FeatureVector f;
    f.cc = 1 + branches_;
    f.nloc = static_cast<std::int64_t>(lines_.size());
    f.tc = tokens_;
    f.mlcn = max_nesting_;
    f.mdt = max_depth_;
    f.ufcc = static_cast<std::int64_t>(callees_.size());
    std::vector<BindingSite> sites = binding_sites(tree_);
    std::set<std::string_view> names;
    for (const BindingSite& s : sites) names.insert(s.name);
    f.vc = static_cast<std::int64_t>(sites.size());
    f.dvc = static_cast<std::int64_t>(names.size());
    std::vector<std::string> exprs = abstract_expressions(tree_);
    f.ec = static_cast<std::int64_t>(exprs.size());
    f.dec = static_cast<std::int64_t>(std::set<std::string>(exprs.begin(), exprs.end()).size());
    return f;
  }

 private:
  void walk(const Node& node, std::int64_t depth, std::int64_t nesting) {
    max_depth_ = std::max(max_depth_, depth);
    if (node.is_leaf) {
      ++tokens_;
      mark_lines(node.range);
      return;
    }
    if (g_.branches.count(node.kind) != 0) ++branches_;
    count_special(node);
    if (g_.control.count(node.kind) != 0 && !is_else_if(node)) {
      ++nesting;
      max_nesting_ = std::max(max_nesting_, nesting);
    }
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      parent_stack_.push_back({&node, i});
      walk(node.children[i], depth + 1, nesting);
      parent_stack_.pop_back();
    }
  }

  // Java `else if` continues the enclosing chain instead of nesting deeper.
  bool is_else_if(const Node& node) const {
    if (tree_.language() != Language::kJava || node.kind != "if_statement") return false;
    if (parent_stack_.empty()) return false;
    auto [parent, index] = parent_stack_.back();
    if (parent->kind != "if_statement" || index == 0) return false;
    const Node& prev = parent->children[index - 1];
    return prev.is_leaf && tree_.text(prev) == "else";
  }

  void count_special(const Node& node) {
    if (tree_.language() == Language::kPython) {
      if (node.kind == "boolean_operator") ++branches_;
      if (node.kind == "call") {
        const Node& target = node.children.front();
        if (target.is_leaf && target.kind == leaf::kIdentifier) {
          callees_.insert(tree_.text(target));
        } else if (target.kind == "attribute") {
          callees_.insert(tree_.text(target.children.back()));
        }
      }
      return;
    }
    if (node.kind == "binary_expression") {
      std::string_view op = tree_.text(node.children[1]);
      if (op == "&&" || op == "||") ++branches_;
    } else if (node.kind == "switch_label") {
      if (tree_.text(node.children.front()) == "case") ++branches_;
    } else if (node.kind == "method_invocation") {
      for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) {
        if (it->is_leaf && it->kind == leaf::kName) {
          callees_.insert(tree_.text(*it));
          break;
        }
      }
    }
  }

  void mark_lines(const ByteRange& range) {
    const std::string& src = tree_.source();
    std::size_t line = line_of(range.start);
    lines_.insert(line);
    for (std::size_t i = range.start; i < range.end; ++i) {
      if (src[i] == '\n' && i + 1 < range.end) lines_.insert(++line);
    }
  }

  std::size_t line_of(std::size_t offset) {
    const std::string& src = tree_.source();
    if (line_starts_.empty()) {
      line_starts_.push_back(0);
      for (std::size_t i = 0; i < src.size(); ++i) {
        if (src[i] == '\n') line_starts_.push_back(i + 1);
      }
    }
    return static_cast<std::size_t>(
        std::upper_bound(line_starts_.begin(), line_starts_.end(), offset) - line_starts_.begin() -
        1);
  }

  const SyntaxTree& tree_;
  const Grammar& g_;
  std::vector<std::pair<const Node*, std::size_t>> parent_stack_;
  std::vector<std::size_t> line_starts_;
  std::set<std::size_t> lines_;
  std::set<std::string_view> callees_;
  std::int64_t branches_ = 0;
  std::int64_t tokens_ = 0;
  std::int64_t max_nesting_ = 0;
  std::int64_t max_depth_ = 0;
};

class ExpressionCollector {
 public:
  ExpressionCollector(const SyntaxTree& tree) : tree_(tree), g_(tables(tree.language())) {}

  std::vector<std::string> run() {
    visit(tree_.function(), nullptr, 0);
    return std::move(out_);
  }

 private:
  void visit(const Node& node, const Node* parent, std::size_t index) {
    if (g_.expressions.count(node.kind) != 0) {
      bool declaring = node.kind == leaf::kIdentifier && parent != nullptr &&
                       is_declaring_identifier(*parent, index, tree_.language());
      if (!declaring) {
        std::string text;
        render(node, text);
        out_.push_back(std::move(text));
      }
    }
    for (std::size_t i = 0; i < node.children.size(); ++i) visit(node.children[i], &node, i);
  }

  void render(const Node& node, std::string& out) const {
    if (g_.literals.count(node.kind) != 0) {
      out.append(kLitPlaceholder);
      return;
    }
    if (node.is_leaf) {
      if (is_identifier_like(node)) {
        out.append(kIdPlaceholder);
      } else {
        out.append(tree_.text(node));
      }
      return;
    }
    for (const Node& child : node.children) render(child, out);
  }

  const SyntaxTree& tree_;
  const Grammar& g_;
  std::vector<std::string> out_;
};

}  // namespace

std::int64_t& FeatureVector::operator[](std::size_t i) {
  std::int64_t* fields[kSize] = {&cc, &nloc, &tc, &mlcn, &mdt, &ufcc, &vc, &dvc, &ec, &dec};
  return *fields[i];
}

std::int64_t FeatureVector::operator[](std::size_t i) const {
  return const_cast<FeatureVector&>(*this)[i];
}

std::array<std::int64_t, FeatureVector::kSize> FeatureVector::values() const {
  return {cc, nloc, tc, mlcn, mdt, ufcc, vc, dvc, ec, dec};
}

std::optional<std::size_t> feature_index(std::string_view name) {
  auto it = std::find(FeatureVector::kNames.begin(), FeatureVector::kNames.end(), name);
  if (it == FeatureVector::kNames.end()) return std::nullopt;
  return static_cast<std::size_t>(it - FeatureVector::kNames.begin());
}

FeatureVector extract_features(const SyntaxTree& tree) { return FeatureWalker(tree).run(); }

std::vector<std::string> abstract_expressions(const SyntaxTree& tree) {
  return ExpressionCollector(tree).run();
}

std::string_view feature_table_version() { return "features-v1"; }

}  // namespace varcat
