#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "varcat/syntax.hpp"

namespace varcat {

enum class Strategy { kFixed, kUniversal };
enum class Order { kCorpus, kSeededShuffle };

std::optional<Strategy> parse_strategy(std::string_view name);
std::string_view strategy_name(Strategy strategy);
std::optional<Order> parse_order(std::string_view name);
std::string_view order_name(Order order);

struct EmbedConfig {
  Strategy strategy = Strategy::kFixed;
  std::string prefix;  // required for the fixed strategy
  NamingConvention convention = NamingConvention::kSnakeCase;
  double rho_min = 0.01;
  double rho_max = 0.05;
  Order order = Order::kCorpus;
  std::uint64_t seed = 0;

  /// Throws UsageError on inconsistent settings.
  void validate() const;
};

struct RenameEdit {
  std::string old_name;
  std::string new_name;
  std::size_t count = 0;

  friend bool operator==(const RenameEdit&, const RenameEdit&) = default;
};

namespace skip {
inline constexpr std::string_view kNotCarrier = "not_carrier";
inline constexpr std::string_view kUnparseable = "unparseable";
inline constexpr std::string_view kRateCap = "rate_cap";
inline constexpr std::string_view kSuffixUnavailable = "suffix_unavailable";
inline constexpr std::string_view kCollision = "collision";
inline constexpr std::string_view kInvalidPrefix = "invalid_prefix";
}  // namespace skip

struct WatermarkRecord {
  std::string id;
  bool watermarked = false;
  std::string prefix;
  std::string suffix;
  std::string target;
  std::string replaced;  // empty when the target already existed
  bool prefix_injected = false;
  std::vector<RenameEdit> renames;
  std::string skip_reason;  // empty when watermarked

  friend bool operator==(const WatermarkRecord&, const WatermarkRecord&) = default;
};

/// prefix + "_" + suffix, or prefix + Suffix for camelCase.
std::string concat(std::string_view prefix, std::string_view suffix, NamingConvention convention);

struct SuffixChoice {
  std::string suffix;
  std::vector<const VariableEntry*> later;  // V': variables after the prefix, suffix first
};

/// Suffix = first variable after the prefix. Empty when |V'| <= 1.
std::optional<SuffixChoice> choose_suffix(const VariableTable& table, std::size_t prefix_index);

/// Result of the replacement-target rules: nullopt means the target
/// already names a variable (nothing to rename).
std::optional<std::string> select_replacement_target(
    const std::vector<const VariableEntry*>& candidates, const VariableTable& table,
    std::string_view target, NamingConvention convention);

struct EmbedOutcome {
  WatermarkRecord record;
  CodeSample sample;  // watermarked sample, or the original when skipped
};

/// Embeds into a sample whose table already holds `prefix`.
EmbedOutcome embed_one(const CodeSample& sample, const VariableTable& table,
                       std::string_view prefix, const EmbedConfig& config);

/// First two variables by offset, or nullopt when fewer than two exist.
std::optional<std::pair<std::string, std::string>> derive_universal_prefix(
    const VariableTable& table);

enum class CarrierGroup { kNatural, kAbsent, kUniversal };

struct CarrierAttempt {
  CarrierGroup group = CarrierGroup::kNatural;
  EmbedOutcome outcome;
};

/// Classifies a parseable carrier (M_n / M_a / universal) and tries to
/// embed, injecting the prefix first for M_a samples. Throws ParseError
/// when the sample does not parse.
CarrierAttempt attempt_carrier(const CodeSample& sample, const EmbedConfig& config);

struct RateBounds {
  std::size_t k_min = 0;
  std::size_t k_max = 0;
  std::vector<std::string> warnings;
};

RateBounds rate_bounds(std::size_t corpus_size, double rho_min, double rho_max);

/// Admission decision for one carrier during the rate-controlled sweep.
struct Candidate {
  CarrierGroup group = CarrierGroup::kNatural;
  bool embeddable = false;
  std::string failure;  // skip reason when not embeddable
};

struct AdmissionPlan {
  std::vector<bool> admitted;          // parallel to candidates
  std::vector<std::string> reasons;    // skip reason for non-admitted ones
  std::vector<std::string> warnings;
  std::size_t admitted_count = 0;
};

/// Walks the candidates (corpus order, or a seeded shuffle of it) filling
/// M_n up to k_max and then M_a up to k_min; universal carriers fill up to
/// k_max.
AdmissionPlan plan_admissions(const std::vector<Candidate>& candidates, const RateBounds& bounds,
                              const EmbedConfig& config);

struct EmbedResult {
  std::vector<CodeSample> samples;
  std::vector<WatermarkRecord> manifest;
  std::vector<std::string> warnings;
  RateBounds bounds;
  std::size_t watermarked = 0;
};

/// Rate-controlled embedding over an in-memory corpus. Non-carriers and
/// skipped samples pass through unchanged; output order equals input order.
EmbedResult embed_corpus(const std::vector<CodeSample>& corpus,
                         const std::set<std::string, std::less<>>& carriers,
                         const EmbedConfig& config);

/// Re-applies a manifest record's renames to the original sample.
CodeSample replay(const CodeSample& original, const WatermarkRecord& record);

}  // namespace varcat
