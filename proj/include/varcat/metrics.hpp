#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "varcat/syntax.hpp"

namespace varcat {

/// Ten function-level complexity measurements.
struct FeatureVector {
  std::int64_t cc = 0;    // extended cyclomatic complexity
  std::int64_t nloc = 0;  // lines holding at least one non-comment token
  std::int64_t tc = 0;    // token count
  std::int64_t mlcn = 0;  // max nesting of control structures
  std::int64_t mdt = 0;   // max depth of the syntax tree
  std::int64_t ufcc = 0;  // distinct callee names
  std::int64_t vc = 0;    // binding sites
  std::int64_t dvc = 0;   // distinct bound names
  std::int64_t ec = 0;    // expressions
  std::int64_t dec = 0;   // distinct abstracted expressions

  static constexpr std::size_t kSize = 10;
  static constexpr std::array<std::string_view, kSize> kNames = {
      "cc", "nloc", "tc", "mlcn", "mdt", "ufcc", "vc", "dvc", "ec", "dec"};

  std::int64_t& operator[](std::size_t i);
  std::int64_t operator[](std::size_t i) const;
  std::array<std::int64_t, kSize> values() const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Index of a feature name in FeatureVector::kNames.
std::optional<std::size_t> feature_index(std::string_view name);

/// The seven features fed to the projection by default.
inline constexpr std::array<std::string_view, 7> kRetainedFeatures = {
    "cc", "nloc", "tc", "vc", "dvc", "ec", "dec"};

FeatureVector extract_features(const SyntaxTree& tree);

/// One canonical string per expression node of the function, identifiers
/// abstracted to ⟨ID⟩ and literals to ⟨LIT⟩, in pre-order.
std::vector<std::string> abstract_expressions(const SyntaxTree& tree);

inline constexpr std::string_view kIdPlaceholder = "⟨ID⟩";
inline constexpr std::string_view kLitPlaceholder = "⟨LIT⟩";

/// Version of the construct tables behind cc/mlcn/ec.
std::string_view feature_table_version();

}  // namespace varcat
