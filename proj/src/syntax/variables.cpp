#include <algorithm>
#include <map>

#include "varcat/syntax.hpp"

namespace varcat {
namespace {

bool is_identifier_leaf(const Node& node) {
  return node.is_leaf && node.kind == leaf::kIdentifier;
}

class BindingCollector {
 public:
  BindingCollector(const SyntaxTree& tree) : tree_(tree) {}

  std::vector<BindingSite> run() {
    const Node& fn = tree_.function();
    if (tree_.language() == Language::kPython) {
      walk_python(fn, nullptr);
    } else {
      walk_java(fn, nullptr);
    }
    std::vector<BindingSite> out;
    for (auto& site : sites_) {
      if (excluded_.count(site.name) == 0) out.push_back(std::move(site));
    }
    std::sort(out.begin(), out.end(),
              [](const BindingSite& a, const BindingSite& b) { return a.range < b.range; });
    return out;
  }

 private:
  void add(const Node& ident, bool is_parameter) {
    if (!is_identifier_leaf(ident)) return;
    sites_.push_back({std::string(tree_.text(ident)), ident.range, is_parameter});
  }

  // Own parameters of the analysed function (not of nested lambdas or defs).
  bool owns_parameters(const Node* parent) const {
    if (parent == nullptr) return false;
    const Node& fn = tree_.function();
    const Node& def = fn.kind == "decorated_definition" ? fn.children.back() : fn;
    return parent == &def;
  }

  // ---- Python --------------------------------------------------------------

  void python_target(const Node& node) {
    if (is_identifier_leaf(node)) {
      add(node, false);
      return;
    }
    if (node.kind == "tuple" || node.kind == "list" || node.kind == "parenthesized_expression" ||
        node.kind == "expression_list" || node.kind == "pattern_list" || node.kind == "list_splat") {
      for (const Node& child : node.children) python_target(child);
    }
  }

  void python_parameter(const Node& param, bool own) {
    if (is_identifier_leaf(param)) {
      add(param, own);
    } else if (param.kind == "default_parameter" || param.kind == "typed_parameter" ||
               param.kind == "typed_default_parameter") {
      python_parameter(param.children.front(), own);
    } else if (param.kind == "list_splat_pattern" || param.kind == "dictionary_splat_pattern") {
      add(param.children.back(), own);
    }
  }

  void walk_python(const Node& node, const Node* parent) {
    if (node.is_leaf) return;
    const std::string_view kind = node.kind;
    if (kind == "parameters" || kind == "lambda_parameters") {
      bool own = kind == "parameters" && owns_parameters(parent);
      for (const Node& child : node.children) python_parameter(child, own);
    } else if (kind == "assignment") {
      python_target(node.children.front());
    } else if (kind == "for_statement" || kind == "for_in_clause") {
      for (std::size_t i = 0; i + 1 < node.children.size(); ++i) {
        if (node.children[i].is_leaf && tree_.text(node.children[i]) == "for") {
          python_target(node.children[i + 1]);
          break;
        }
      }
    } else if (kind == "with_item") {
      if (node.children.size() == 3) python_target(node.children[2]);
    } else if (kind == "named_expression") {
      add(node.children.front(), false);
    } else if (kind == "as_pattern_target") {
      add(node.children.front(), false);
    } else if (kind == "global_statement" || kind == "nonlocal_statement") {
      for (const Node& child : node.children) {
        if (is_identifier_leaf(child)) excluded_.insert(std::string(tree_.text(child)));
      }
    }
    for (const Node& child : node.children) walk_python(child, &node);
  }

  // ---- Java ----------------------------------------------------------------

  void add_direct_identifier(const Node& node, bool is_parameter) {
    for (const Node& child : node.children) {
      if (is_identifier_leaf(child)) {
        add(child, is_parameter);
        return;
      }
    }
  }

  void walk_java(const Node& node, const Node* parent) {
    if (node.is_leaf) return;
    const std::string_view kind = node.kind;
    if (kind == "formal_parameter" || kind == "spread_parameter") {
      bool own = parent != nullptr && parent->kind == "formal_parameters" && own_params_ == parent;
      add_direct_identifier(node, own);
    } else if (kind == "formal_parameters" && owns_parameters(parent)) {
      own_params_ = &node;
    } else if (kind == "variable_declarator") {
      if (parent != nullptr && parent->kind == "local_variable_declaration") {
        add(node.children.front(), false);
      }
    } else if (kind == "enhanced_for_statement" || kind == "catch_formal_parameter" ||
               kind == "type_pattern") {
      // The declared name is the first direct identifier child; in the
      // enhanced for the iterable may also be a bare identifier, after ':'.
      add_direct_identifier(node, false);
    } else if (kind == "resource") {
      if (node.children.size() > 1) add_direct_identifier(node, false);
    } else if (kind == "lambda_expression") {
      add(node.children.front(), false);
    } else if (kind == "inferred_parameters") {
      for (const Node& child : node.children) add(child, false);
    }
    for (const Node& child : node.children) walk_java(child, &node);
  }

  const SyntaxTree& tree_;
  const Node* own_params_ = nullptr;
  std::vector<BindingSite> sites_;
  std::set<std::string, std::less<>> excluded_;
};

void collect_identifiers(const Node& node, std::vector<const Node*>& out) {
  if (node.is_leaf) {
    if (node.kind == leaf::kIdentifier) out.push_back(&node);
    return;
  }
  for (const Node& child : node.children) collect_identifiers(child, out);
}

}  // namespace

VariableTable::VariableTable(std::vector<VariableEntry> entries) : entries_(std::move(entries)) {}

std::optional<std::size_t> VariableTable::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

const VariableEntry* VariableTable::find(std::string_view name) const {
  std::optional<std::size_t> i = index_of(name);
  return i ? &entries_[*i] : nullptr;
}

std::vector<BindingSite> binding_sites(const SyntaxTree& tree) {
  return BindingCollector(tree).run();
}

VariableTable extract_variables(const SyntaxTree& tree) {
  std::map<std::string, bool, std::less<>> bound;  // name -> is_parameter
  for (const BindingSite& site : binding_sites(tree)) bound[site.name] |= site.is_parameter;

  std::vector<const Node*> idents;
  collect_identifiers(tree.function(), idents);

  std::vector<VariableEntry> entries;
  std::map<std::string_view, std::size_t, std::less<>> slot;
  for (const Node* ident : idents) {
    std::string_view text = tree.text(*ident);
    auto it = bound.find(text);
    if (it == bound.end()) continue;
    auto [pos, fresh] = slot.try_emplace(text, entries.size());
    if (fresh) {
      VariableEntry entry;
      entry.name = std::string(text);
      entry.first_offset = ident->range.start;
      entry.is_parameter = it->second;
      entries.push_back(std::move(entry));
    }
    entries[pos->second].occurrences.push_back(ident->range);
  }
  return VariableTable(std::move(entries));
}

std::set<std::string, std::less<>> identifier_names(const SyntaxTree& tree) {
  std::vector<const Node*> idents;
  collect_identifiers(tree.function(), idents);
  std::set<std::string, std::less<>> names;
  for (const Node* ident : idents) names.emplace(tree.text(*ident));
  return names;
}

}  // namespace varcat
