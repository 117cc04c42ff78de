#pragma once

#include <set>
#include <string>

#include "varcat/syntax.hpp"

namespace varcat::testing {

/// Names whose tokens differ between two parses of the same snippet. Throws
/// std::runtime_error when the token streams are not aligned (different
/// lengths or kinds), which means something other than renaming happened.
std::set<std::string> renamed_identifiers(const CodeSample& before, const CodeSample& after);

}  // namespace varcat::testing
