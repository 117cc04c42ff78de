#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "varcat/embedding.hpp"
#include "varcat/io.hpp"
#include "varcat/verification.hpp"

namespace varcat {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

/// "varcat 0.1.0 (grammars: ...; features-v1)"
std::string version_string();

/// Worker count for --jobs 0: the hardware concurrency, at least 1.
std::size_t default_jobs();

struct FeaturesStage {
  std::string input;
  std::string output;
  CorpusOptions corpus;
  std::size_t jobs = 1;
};

struct ScoreStage {
  std::string input;        // raw corpus or features JSONL
  std::string output;       // {"id","score"} per line
  std::string model_output;  // sidecar; defaults to output + ".model.json"
  CorpusOptions corpus;
  bool all_features = false;
  std::size_t jobs = 1;
};

struct SelectStage {
  std::string scores;
  std::string output;  // carrier ids, one per line
  double tau = 0.35;
  std::string labels;  // optional {"id","label"} JSONL
  std::string report;  // optional precision/recall/F1 JSON
};

struct EmbedStage {
  std::string input;
  std::string output;
  std::string manifest;
  std::string carriers;  // optional id list; default: every sample
  std::string only_ids;  // optional id list intersected with the carriers
  CorpusOptions corpus;
  EmbedConfig config;
  std::size_t jobs = 1;
};

struct ValidationStage {
  std::string corpus_path;  // watermarked corpus
  std::string manifest;
  std::string output;
  CorpusOptions corpus;
  std::size_t n = 500;
  std::uint64_t seed = 0;
  Strategy strategy = Strategy::kFixed;
};

struct VerifyStage {
  std::string pairs;
  std::string model;         // client URI
  std::string output;        // result JSON; empty: none
  std::string observations;  // per-query audit JSONL; empty: none
  VerifyOptions options;
};

struct StageReport {
  std::vector<std::string> warnings;
};

/// Each stage reads and writes files only; warnings are returned, not printed.
StageReport run_features(const FeaturesStage& stage);
StageReport run_score(const ScoreStage& stage);
StageReport run_select(const SelectStage& stage);
StageReport run_embed(const EmbedStage& stage);
StageReport run_build_validation(const ValidationStage& stage);
VerificationResult run_verify(const VerifyStage& stage, StageReport* report = nullptr);

struct PipelineConfig {
  std::string input;
  std::string work_dir;
  CorpusOptions corpus;
  double tau = 0.35;
  EmbedConfig embed;
  std::size_t validation_n = 500;
  std::string model;
  VerifyOptions verify;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool all_features = false;
};

/// score -> select -> embed -> build-validation -> verify, with every
/// intermediate artifact in work_dir. Stage seeds derive from config.seed.
VerificationResult run_pipeline(const PipelineConfig& config, StageReport* report = nullptr);

/// Single-line JSON for a result, as the verify stage writes it.
std::string result_line(const VerificationResult& result);

}  // namespace varcat
