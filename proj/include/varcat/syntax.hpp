#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "varcat/errors.hpp"

namespace varcat {

enum class Language { kPython, kJava };

std::optional<Language> parse_language(std::string_view name);
std::string_view language_name(Language language);

/// One function-level snippet of a corpus.
struct CodeSample {
  std::string id;
  std::string code;
  Language language = Language::kPython;

  friend bool operator==(const CodeSample&, const CodeSample&) = default;
};

/// Half-open byte range [start, end) into a sample's code.
struct ByteRange {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool contains(const ByteRange& other) const {
    return start <= other.start && other.end <= end;
  }
  friend bool operator==(const ByteRange&, const ByteRange&) = default;
  friend auto operator<=>(const ByteRange&, const ByteRange&) = default;
};

// Leaf kinds shared by both grammars. Inner node kinds are grammar specific
// ("if_statement", "binary_operator", ...) and listed in the metrics tables.
namespace leaf {
inline constexpr std::string_view kIdentifier = "identifier";  // may name a variable
inline constexpr std::string_view kName = "name";  // attribute, method, label, keyword argument
inline constexpr std::string_view kTypeIdentifier = "type_identifier";
inline constexpr std::string_view kKeyword = "keyword";
inline constexpr std::string_view kOperator = "operator";
inline constexpr std::string_view kInteger = "integer";
inline constexpr std::string_view kFloat = "float";
inline constexpr std::string_view kString = "string";
inline constexpr std::string_view kStringContent = "string_content";
inline constexpr std::string_view kCharacter = "character";
inline constexpr std::string_view kTrue = "true";
inline constexpr std::string_view kFalse = "false";
inline constexpr std::string_view kNone = "none";
inline constexpr std::string_view kNull = "null";
inline constexpr std::string_view kThis = "this";
inline constexpr std::string_view kSuper = "super";
}  // namespace leaf

/// A concrete syntax tree node. Kinds always point at static storage.
struct Node {
  std::string_view kind;
  ByteRange range;
  std::vector<Node> children;
  bool is_leaf = false;
};

/// Parsed snippet. Owns a copy of the source so byte ranges stay meaningful.
class SyntaxTree {
 public:
  SyntaxTree(Language language, std::string source, Node root,
             std::vector<ByteRange> comments, std::vector<std::size_t> function_path);

  Language language() const { return language_; }
  const std::string& source() const { return source_; }
  const Node& root() const { return root_; }
  const std::vector<ByteRange>& comments() const { return comments_; }

  /// The first function definition (including its decorators, for Python).
  const Node& function() const;

  std::string_view text(const Node& node) const;
  std::string_view text(const ByteRange& range) const;

 private:
  Language language_;
  std::string source_;
  Node root_;
  std::vector<ByteRange> comments_;
  std::vector<std::size_t> function_path_;
};

/// Parses a snippet. Throws ParseError on malformed code or when the snippet
/// holds no function definition.
SyntaxTree parse(const CodeSample& sample);

/// Leaves in source order, comments excluded.
std::vector<const Node*> leaves(const Node& node);

/// Re-assembles the source from the leaves and the gaps between them.
std::string reconstruct(const SyntaxTree& tree);

struct VariableEntry {
  std::string name;
  std::size_t first_offset = 0;
  std::vector<ByteRange> occurrences;  // ascending
  bool is_parameter = false;

  std::size_t frequency() const { return occurrences.size(); }
};

/// Local variables of the analyzed function ordered by first occurrence.
class VariableTable {
 public:
  VariableTable() = default;
  explicit VariableTable(std::vector<VariableEntry> entries);

  const std::vector<VariableEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const VariableEntry& operator[](std::size_t i) const { return entries_[i]; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  bool contains(std::string_view name) const { return index_of(name).has_value(); }
  const VariableEntry* find(std::string_view name) const;

 private:
  std::vector<VariableEntry> entries_;
};

/// Parameters and locally bound names of tree.function(). Occurrences cover
/// every identifier token spelling a bound name; attribute and member names,
/// keyword-argument names and string contents are never included.
VariableTable extract_variables(const SyntaxTree& tree);

/// Texts of all identifier tokens in the function, bound or not.
std::set<std::string, std::less<>> identifier_names(const SyntaxTree& tree);

/// Binding sites (parameters, declarators, assignment targets, ...) in
/// source order. Names declared global/nonlocal are excluded.
struct BindingSite {
  std::string name;
  ByteRange range;
  bool is_parameter = false;
};
std::vector<BindingSite> binding_sites(const SyntaxTree& tree);

bool is_reserved_word(std::string_view word, Language language);
bool is_valid_identifier(std::string_view word, Language language);

enum class NamingConvention { kSnakeCase, kCamelCase };

std::optional<NamingConvention> parse_convention(std::string_view name);
std::string_view convention_name(NamingConvention convention);

/// True when the name joins two words under the given convention.
bool is_compound(std::string_view name, NamingConvention convention);

struct RenameResult {
  CodeSample sample;
  std::size_t replaced = 0;  // 0 means the rename was a no-op
};

/// Replaces every occurrence of `old_name` listed in `table` with
/// `new_name`. Throws CollisionError if `new_name` already names another
/// variable, InvalidIdentifier if it is not a legal identifier.
RenameResult rename(const CodeSample& sample, const VariableTable& table,
                    std::string_view old_name, std::string_view new_name);

/// Convenience overload that parses the sample first.
RenameResult rename(const CodeSample& sample, std::string_view old_name,
                    std::string_view new_name);

/// Version tag of the bundled grammars, recorded in artifacts.
std::string_view grammar_version();

}  // namespace varcat
