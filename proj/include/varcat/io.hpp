#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "varcat/embedding.hpp"
#include "varcat/metrics.hpp"
#include "varcat/selection.hpp"
#include "varcat/verification.hpp"

namespace varcat {

struct CorpusOptions {
  std::string code_field = "code";
  std::string id_field = "id";
  std::optional<Language> language;  // else taken from each record's "language"
  bool lenient = false;              // skip malformed lines instead of failing
};

/// One JSON Lines record. `raw` is the line exactly as read (without the
/// newline) so untouched records can be written back byte for byte.
struct CorpusRecord {
  CodeSample sample;
  std::string raw;
  std::size_t line_number = 0;
};

/// Streams a JSON Lines corpus record by record.
class CorpusReader {
 public:
  CorpusReader(const std::string& path, CorpusOptions options);

  /// False at end of input. Throws SchemaError on malformed records unless
  /// lenient, in which case they are skipped and counted.
  bool next(CorpusRecord& record);

  std::size_t skipped() const { return skipped_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::string path_;
  CorpusOptions options_;
  std::ifstream in_;
  std::size_t line_number_ = 0;
  std::size_t skipped_ = 0;
  std::set<std::string> seen_ids_;
  std::vector<std::string> warnings_;
};

std::vector<CorpusRecord> load_corpus(const std::string& path, const CorpusOptions& options);

/// Replaces the string value of top-level `field` in a JSON object line,
/// leaving every other byte untouched.
std::string replace_json_string_field(const std::string& line, std::string_view field,
                                      std::string_view value);

/// Lowercase hex SHA-256 of a file's bytes.
std::string file_sha256(const std::string& path);

/// Reads non-empty lines (ids, one per line).
std::vector<std::string> read_lines(const std::string& path);

/// Parses every line of a JSON Lines file.
std::vector<nlohmann::json> read_jsonl(const std::string& path);

nlohmann::ordered_json features_to_json(const std::string& id, const FeatureVector& f);
FeatureVector features_from_json(const nlohmann::json& j);

nlohmann::ordered_json model_to_json(const ProjectionModel& model);
ProjectionModel model_from_json(const nlohmann::json& j);

nlohmann::ordered_json record_to_json(const WatermarkRecord& record);
WatermarkRecord record_from_json(const nlohmann::json& j);

nlohmann::ordered_json pair_to_json(const ValidationPair& pair);
ValidationPair pair_from_json(const nlohmann::json& j);

nlohmann::ordered_json result_to_json(const VerificationResult& result);

/// Label file: {"id", "label": "positive"|"negative"|bool} per line.
std::map<std::string, bool> read_labels(const std::string& path);

/// Output stream that raises IoError when opening or flushing fails.
class OutputFile {
 public:
  explicit OutputFile(const std::string& path);
  std::ostream& stream() { return out_; }
  void close();

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace varcat
