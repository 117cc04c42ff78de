#pragma once

// Deterministic generator of small Python functions for tests. Samples come
// in three flavours: with a parameter named `key` (natural carriers), without
// it (absent carriers), and deliberately complex ones that selection should
// reject.

#include <cstdint>
#include <string>
#include <vector>

#include "varcat/syntax.hpp"

namespace varcat::testing {

struct CorpusShape {
  std::size_t size = 100;
  double natural_fraction = 0.4;  // samples that already use `key`
  double complex_fraction = 0.2;  // heavily nested samples
  std::uint64_t seed = 1;
};

std::vector<CodeSample> synthetic_corpus(const CorpusShape& shape);

/// One JSON object per line: {"id", "code", "language", "repo"}.
std::string to_jsonl(const std::vector<CodeSample>& corpus);

void write_jsonl(const std::string& path, const std::vector<CodeSample>& corpus);

}  // namespace varcat::testing
