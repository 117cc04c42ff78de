#include "varcat/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>

namespace varcat {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string where(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line);
}

// Index just past the JSON value starting at `i`, or npos if malformed.
std::size_t skip_json_value(const std::string& s, std::size_t i) {
  if (i >= s.size()) return std::string::npos;
  if (s[i] == '"') {
    for (++i; i < s.size(); ++i) {
      if (s[i] == '\\') {
        ++i;
      } else if (s[i] == '"') {
        return i + 1;
      }
    }
    return std::string::npos;
  }
  if (s[i] == '{' || s[i] == '[') {
    int depth = 0;
    for (; i < s.size(); ++i) {
      char c = s[i];
      if (c == '"') {
        i = skip_json_value(s, i);
        if (i == std::string::npos) return i;
        --i;
      } else if (c == '{' || c == '[') {
        ++depth;
      } else if (c == '}' || c == ']') {
        if (--depth == 0) return i + 1;
      }
    }
    return std::string::npos;
  }
  while (i < s.size() && s[i] != ',' && s[i] != '}' && s[i] != ']' && s[i] != ' ' &&
         s[i] != '\t' && s[i] != '\r' && s[i] != '\n') {
    ++i;
  }
  return i;
}

std::size_t skip_ws(const std::string& s, std::size_t i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r' || s[i] == '\n')) ++i;
  return i;
}

}  // namespace

CorpusReader::CorpusReader(const std::string& path, CorpusOptions options)
    : path_(path), options_(std::move(options)), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open corpus " + path);
}

bool CorpusReader::next(CorpusRecord& record) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::string problem;
    json j = json::parse(line, nullptr, false);
    CodeSample sample;
    if (j.is_discarded() || !j.is_object()) {
      problem = "not a JSON object";
    } else if (!j.contains(options_.code_field) || !j[options_.code_field].is_string()) {
      problem = "missing string field \"" + options_.code_field + "\"";
    } else {
      sample.code = j[options_.code_field].get<std::string>();
      if (j.contains(options_.id_field)) {
        const json& id = j[options_.id_field];
        sample.id = id.is_string() ? id.get<std::string>() : id.dump();
      } else {
        sample.id = std::to_string(line_number_);
      }
      std::optional<Language> lang = options_.language;
      if (!lang && j.contains("language") && j["language"].is_string()) {
        lang = parse_language(j["language"].get<std::string>());
        if (!lang) problem = "unsupported language \"" + j["language"].get<std::string>() + "\"";
      } else if (!lang) {
        problem = "no language given (use --lang or a \"language\" field)";
      }
      if (lang) sample.language = *lang;
      if (problem.empty() && !seen_ids_.insert(sample.id).second) {
        throw SchemaError(where(path_, line_number_) + ": duplicate id \"" + sample.id + "\"");
      }
    }
    if (!problem.empty()) {
      if (!options_.lenient) throw SchemaError(where(path_, line_number_) + ": " + problem);
      ++skipped_;
      warnings_.push_back(where(path_, line_number_) + ": skipped, " + problem);
      continue;
    }
    record.sample = std::move(sample);
    record.raw = std::move(line);
    record.line_number = line_number_;
    return true;
  }
  if (in_.bad()) throw IoError("read error on " + path_);
  return false;
}

std::vector<CorpusRecord> load_corpus(const std::string& path, const CorpusOptions& options) {
  CorpusReader reader(path, options);
  std::vector<CorpusRecord> out;
  CorpusRecord rec;
  while (reader.next(rec)) out.push_back(rec);
  return out;
}

std::string replace_json_string_field(const std::string& line, std::string_view field,
                                      std::string_view value) {
  std::size_t i = skip_ws(line, 0);
  if (i >= line.size() || line[i] != '{') throw SchemaError("record is not a JSON object");
  i = skip_ws(line, i + 1);
  while (i < line.size() && line[i] != '}') {
    std::size_t key_end = skip_json_value(line, i);
    if (key_end == std::string::npos || line[i] != '"') break;
    json key = json::parse(line.substr(i, key_end - i), nullptr, false);
    i = skip_ws(line, key_end);
    if (i >= line.size() || line[i] != ':') break;
    std::size_t value_start = skip_ws(line, i + 1);
    std::size_t value_end = skip_json_value(line, value_start);
    if (value_end == std::string::npos) break;
    if (key.is_string() && key.get<std::string>() == field) {
      return line.substr(0, value_start) + json(std::string(value)).dump() + line.substr(value_end);
    }
    i = skip_ws(line, value_end);
    if (i < line.size() && line[i] == ',') i = skip_ws(line, i + 1);
  }
  throw SchemaError("field \"" + std::string(field) + "\" not found in record");
}

std::string file_sha256(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest.data(), &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char byte[3];
  for (unsigned int k = 0; k < len; ++k) {
    std::snprintf(byte, sizeof byte, "%02x", digest[k]);
    hex += byte;
  }
  return hex;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw SchemaError(where(path, n) + ": malformed JSON");
    out.push_back(std::move(j));
  }
  return out;
}

ordered_json features_to_json(const std::string& id, const FeatureVector& f) {
  ordered_json j = {{"id", id}};
  for (std::size_t i = 0; i < FeatureVector::kSize; ++i) j[std::string(FeatureVector::kNames[i])] = f[i];
  return j;
}

FeatureVector features_from_json(const json& j) {
  FeatureVector f;
  for (std::size_t i = 0; i < FeatureVector::kSize; ++i) {
    std::string name(FeatureVector::kNames[i]);
    if (!j.contains(name) || !j[name].is_number_integer()) {
      throw SchemaError("feature record lacks integer field \"" + name + "\"");
    }
    f[i] = j[name].get<std::int64_t>();
  }
  return f;
}

namespace {

ordered_json vec(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd unvec(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

}  // namespace

ordered_json model_to_json(const ProjectionModel& m) {
  return {{"method", m.method},   {"features", m.features},   {"d", m.dimension()},
          {"mean", vec(m.mean)},  {"std", vec(m.std)},        {"w", vec(m.w)},
          {"lambda_max", m.lambda_max}, {"gamma", m.gamma}};
}

ProjectionModel model_from_json(const json& j) {
  try {
    ProjectionModel m;
    m.method = j.at("method").get<std::string>();
    m.features = j.at("features").get<std::vector<std::string>>();
    m.mean = unvec(j.at("mean"));
    m.std = unvec(j.at("std"));
    m.w = unvec(j.at("w"));
    m.lambda_max = j.at("lambda_max").get<double>();
    m.gamma = j.at("gamma").get<double>();
    return m;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model file: ") + e.what());
  }
}

ordered_json record_to_json(const WatermarkRecord& r) {
  ordered_json renames = ordered_json::array();
  for (const RenameEdit& e : r.renames) {
    renames.push_back({{"old", e.old_name}, {"new", e.new_name}, {"count", e.count}});
  }
  return {{"id", r.id},
          {"watermarked", r.watermarked},
          {"prefix", r.prefix},
          {"suffix", r.suffix},
          {"target", r.target},
          {"replaced", r.replaced},
          {"prefix_injected", r.prefix_injected},
          {"renames", renames},
          {"skip_reason", r.skip_reason.empty() ? ordered_json(nullptr) : ordered_json(r.skip_reason)}};
}

WatermarkRecord record_from_json(const json& j) {
  try {
    WatermarkRecord r;
    r.id = j.at("id").get<std::string>();
    r.watermarked = j.at("watermarked").get<bool>();
    r.prefix = j.value("prefix", "");
    r.suffix = j.value("suffix", "");
    r.target = j.value("target", "");
    r.replaced = j.value("replaced", "");
    r.prefix_injected = j.value("prefix_injected", false);
    for (const json& e : j.value("renames", json::array())) {
      r.renames.push_back({e.at("old").get<std::string>(), e.at("new").get<std::string>(),
                           e.at("count").get<std::size_t>()});
    }
    if (j.contains("skip_reason") && j["skip_reason"].is_string()) {
      r.skip_reason = j["skip_reason"].get<std::string>();
    }
    return r;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("manifest record: ") + e.what());
  }
}

ordered_json pair_to_json(const ValidationPair& p) {
  return {{"id", p.id},
          {"input_with_trigger", p.input_with_trigger},
          {"input_without_trigger", p.input_without_trigger},
          {"target_with", p.target_with},
          {"target_without", p.target_without},
          {"truncation_offset", p.truncation_offset},
          {"control_truncation_offset", p.control_truncation_offset}};
}

ValidationPair pair_from_json(const json& j) {
  try {
    ValidationPair p;
    p.id = j.at("id").get<std::string>();
    p.input_with_trigger = j.at("input_with_trigger").get<std::string>();
    p.input_without_trigger = j.at("input_without_trigger").get<std::string>();
    p.target_with = j.at("target_with").get<std::string>();
    p.target_without = j.at("target_without").get<std::string>();
    p.truncation_offset = j.value("truncation_offset", std::size_t{0});
    p.control_truncation_offset = j.value("control_truncation_offset", std::size_t{0});
    return p;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("validation pair: ") + e.what());
  }
}

ordered_json result_to_json(const VerificationResult& r) {
  return {{"a", r.table.a},
          {"b", r.table.b},
          {"c", r.table.c},
          {"d", r.table.d},
          {"p_value", r.p_value},
          {"alpha", r.alpha},
          {"sidedness", std::string(sidedness_name(r.sidedness))},
          {"verdict", std::string(r.verdict())}};
}

std::map<std::string, bool> read_labels(const std::string& path) {
  std::map<std::string, bool> labels;
  std::size_t n = 0;
  for (const json& j : read_jsonl(path)) {
    ++n;
    if (!j.is_object() || !j.contains("id") || !j.contains("label")) {
      throw SchemaError(path + ": record " + std::to_string(n) + " needs \"id\" and \"label\"");
    }
    std::string id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    const json& label = j["label"];
    if (label.is_boolean()) {
      labels[id] = label.get<bool>();
    } else if (label == "positive" || label == "negative") {
      labels[id] = label == "positive";
    } else {
      throw SchemaError(path + ": record " + std::to_string(n) + " has an unknown label " + label.dump());
    }
  }
  return labels;
}

OutputFile::OutputFile(const std::string& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot write " + path);
}

void OutputFile::close() {
  out_.flush();
  if (!out_) throw IoError("write failed on " + path_);
  out_.close();
}

}  // namespace varcat
