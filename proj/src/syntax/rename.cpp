#include <algorithm>

#include "varcat/syntax.hpp"

namespace varcat {

RenameResult rename(const CodeSample& sample, const VariableTable& table,
                    std::string_view old_name, std::string_view new_name) {
  if (!is_valid_identifier(new_name, sample.language)) {
    throw InvalidIdentifier("not a valid " + std::string(language_name(sample.language)) +
                            " identifier: '" + std::string(new_name) + "'");
  }
  RenameResult result{sample, 0};
  const VariableEntry* entry = table.find(old_name);
  if (entry == nullptr || old_name == new_name) return result;
  if (table.contains(new_name)) {
    throw CollisionError("'" + std::string(new_name) + "' already names a variable");
  }

  std::string& code = result.sample.code;
  std::vector<ByteRange> spots = entry->occurrences;
  std::sort(spots.begin(), spots.end(),
            [](const ByteRange& a, const ByteRange& b) { return a.start > b.start; });
  for (const ByteRange& r : spots) {
    if (r.end > code.size() || std::string_view(code).substr(r.start, r.size()) != old_name) {
      throw DataError("variable table does not match sample '" + sample.id + "'");
    }
    code.replace(r.start, r.size(), new_name);
  }
  result.replaced = spots.size();
  parse(result.sample);  // the edit must leave the snippet parseable
  return result;
}

RenameResult rename(const CodeSample& sample, std::string_view old_name,
                    std::string_view new_name) {
  SyntaxTree tree = parse(sample);
  return rename(sample, extract_variables(tree), old_name, new_name);
}

}  // namespace varcat
