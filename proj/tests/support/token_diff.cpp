#include "token_diff.hpp"

#include <stdexcept>

namespace varcat::testing {

std::set<std::string> renamed_identifiers(const CodeSample& before, const CodeSample& after) {
  SyntaxTree a = parse(before);
  SyntaxTree b = parse(after);
  auto la = leaves(a.root());
  auto lb = leaves(b.root());
  if (la.size() != lb.size()) throw std::runtime_error("token counts differ");
  std::set<std::string> out;
  for (std::size_t i = 0; i < la.size(); ++i) {
    if (la[i]->kind != lb[i]->kind) throw std::runtime_error("token kinds differ");
    if (a.text(*la[i]) == b.text(*lb[i])) continue;
    if (la[i]->kind != leaf::kIdentifier) throw std::runtime_error("non-identifier token changed");
    out.insert(std::string(a.text(*la[i])));
  }
  return out;
}

}  // namespace varcat::testing
