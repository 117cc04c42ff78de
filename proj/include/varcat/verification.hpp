#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "varcat/embedding.hpp"

namespace varcat {

inline constexpr std::string_view kUnknownToken = "unknown_token";

struct ValidationPair {
  std::string id;
  std::string input_with_trigger;
  std::string input_without_trigger;
  std::string target_with;
  std::string target_without;
  std::size_t truncation_offset = 0;
  std::size_t control_truncation_offset = 0;

  friend bool operator==(const ValidationPair&, const ValidationPair&) = default;
};

/// Naming convention a record was embedded with, recovered from its target.
std::optional<NamingConvention> infer_convention(const WatermarkRecord& record);

/// Trigger and control prompts for one watermarked sample, or nullopt when
/// the sample offers no usable truncation point.
std::optional<ValidationPair> build_pair(const CodeSample& watermarked,
                                         const WatermarkRecord& record, Strategy strategy);

/// Samples n usable pairs (seeded) from the watermarked records, returned in
/// corpus order. `corpus` and `manifest` are parallel. Throws
/// InsufficientCarriers when fewer than n records are usable.
std::vector<ValidationPair> build_validation_set(const std::vector<WatermarkRecord>& manifest,
                                                 const std::vector<CodeSample>& corpus,
                                                 std::size_t n, std::uint64_t seed,
                                                 Strategy strategy);

/// Whole-token (or substring) occurrence of `target` in a completion.
bool observe(std::string_view completion, std::string_view target, bool substring = false);

enum class Sidedness { kGreater, kTwoSided };
std::optional<Sidedness> parse_sidedness(std::string_view name);
std::string_view sidedness_name(Sidedness sidedness);

struct ContingencyTable {
  std::uint64_t a = 0;  // trigger group hits
  std::uint64_t b = 0;  // trigger group misses
  std::uint64_t c = 0;  // control group hits
  std::uint64_t d = 0;  // control group misses

  friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

/// Fisher's exact test. Degenerate margins give 1.0.
double fisher_exact(const ContingencyTable& table, Sidedness sidedness = Sidedness::kGreater);

struct CompletionRequest {
  std::string prompt;
  int max_tokens = 32;
  double temperature = 1.0;
  // Hints for test doubles; never sent over the wire.
  std::string expected_target;
  bool trigger_group = false;
  std::uint64_t query_index = 0;
};

class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  /// Thread-safe. Throws ModelUnreachable or MalformedResponse.
  virtual std::string complete(const CompletionRequest& request) = 0;
};

enum class SimulatorKind { kWatermarked, kClean, kEcho };

/// Deterministic stand-in model: the emission decision of query i depends on
/// the seed and i only, not on scheduling.
std::unique_ptr<CompletionClient> make_simulated_client(SimulatorKind kind, double p_trigger,
                                                        double p_control, std::uint64_t seed,
                                                        std::string echo_text = "pass");

struct HttpClientOptions {
  int retries = 3;
  int backoff_ms = 200;  // doubled per retry
  int timeout_s = 60;
};

std::unique_ptr<CompletionClient> make_http_client(const std::string& url,
                                                   HttpClientOptions options = {});

/// "http(s)://..." or "sim:watermarked?pt=..&pc=..&seed=..", "sim:clean?pc=..&seed=..",
/// "sim:echo?text=..". Throws UsageError on unknown schemes.
std::unique_ptr<CompletionClient> make_client(const std::string& uri);

/// What a control completion is checked for: the renamed concatenation of
/// the control prompt, or the trigger's own target.
enum class ControlTarget { kRenamed, kOriginal };
std::optional<ControlTarget> parse_control_target(std::string_view name);

struct VerifyOptions {
  double alpha = 0.05;
  Sidedness sidedness = Sidedness::kGreater;
  int max_tokens = 32;
  double temperature = 1.0;
  std::size_t jobs = 4;
  bool substring_match = false;
  ControlTarget control_target = ControlTarget::kRenamed;
  std::string journal_path;  // empty: no journal
};

struct Observation {
  std::size_t index = 0;  // query index: 2k trigger, 2k+1 control
  bool trigger_group = false;
  std::string completion;
  bool bit = false;
};

struct VerificationResult {
  ContingencyTable table;
  double p_value = 1.0;
  double alpha = 0.05;
  Sidedness sidedness = Sidedness::kGreater;
  bool watermarked = false;
  std::vector<Observation> observations;  // by query index

  std::string_view verdict() const { return watermarked ? "watermarked" : "not_detected"; }
};

/// Queries the trigger and control prompt of every pair, then tests. With a
/// journal, completed queries are appended as they finish and reused on the
/// next run; a model failure then raises AbortedRun.
VerificationResult verify(const std::vector<ValidationPair>& pairs, CompletionClient& client,
                          const VerifyOptions& options = {});

}  // namespace varcat
