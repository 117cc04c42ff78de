#include "varcat/pipeline.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "varcat/random.hpp"

namespace varcat {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::size_t kBatch = 2048;

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
// is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (std::thread& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

// Reads the corpus in batches and hands each batch to `fn`.
template <class Fn>
std::vector<std::string> for_each_batch(const std::string& path, const CorpusOptions& options, Fn fn) {
  CorpusReader reader(path, options);
  std::vector<CorpusRecord> batch;
  CorpusRecord rec;
  while (true) {
    bool more = reader.next(rec);
    if (more) batch.push_back(std::move(rec));
    if (batch.size() == kBatch || (!more && !batch.empty())) {
      fn(batch);
      batch.clear();
    }
    if (!more) break;
  }
  return reader.warnings();
}

void append(std::vector<std::string>& to, const std::vector<std::string>& from) {
  to.insert(to.end(), from.begin(), from.end());
}

struct FeatureRows {
  std::vector<std::string> ids;
  std::vector<FeatureVector> rows;
};

FeatureRows compute_features(const std::string& path, const CorpusOptions& options, std::size_t jobs,
                             StageReport& report) {
  FeatureRows out;
  auto warnings = for_each_batch(path, options, [&](const std::vector<CorpusRecord>& batch) {
    std::vector<std::optional<FeatureVector>> features(batch.size());
    std::vector<std::string> errors(batch.size());
    parallel_for(batch.size(), jobs, [&](std::size_t i) {
      try {
        features[i] = extract_features(parse(batch[i].sample));
      } catch (const ParseError& e) {
        errors[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (!features[i]) {
        report.warnings.push_back(path + ":" + std::to_string(batch[i].line_number) +
                                  ": unparseable sample \"" + batch[i].sample.id + "\" left out (" +
                                  errors[i] + ")");
        continue;
      }
      out.ids.push_back(batch[i].sample.id);
      out.rows.push_back(*features[i]);
    }
  });
  append(report.warnings, warnings);
  return out;
}

bool looks_like_features(const std::string& path, const CorpusOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    return j.is_object() && j.contains("cc") && j.contains("nloc") && !j.contains(options.code_field);
  }
  return false;
}

std::set<std::string, std::less<>> read_id_set(const std::string& path) {
  std::vector<std::string> lines = read_lines(path);
  return {lines.begin(), lines.end()};
}

void write_json_file(const std::string& path, const ordered_json& j) {
  OutputFile out(path);
  out.stream() << j.dump(2) << "\n";
  out.close();
}

}  // namespace

std::string version_string() {
  return "varcat " + std::string(kToolkitVersion) + " (grammars: " + std::string(grammar_version()) +
         "; " + std::string(feature_table_version()) + ")";
}

std::size_t default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

StageReport run_features(const FeaturesStage& stage) {
  StageReport report;
  FeatureRows rows = compute_features(stage.input, stage.corpus, stage.jobs, report);
  OutputFile out(stage.output);
  for (std::size_t i = 0; i < rows.ids.size(); ++i) {
    out.stream() << features_to_json(rows.ids[i], rows.rows[i]).dump() << "\n";
  }
  out.close();
  return report;
}

StageReport run_score(const ScoreStage& stage) {
  StageReport report;
  FeatureRows rows;
  if (looks_like_features(stage.input, stage.corpus)) {
    for (const json& j : read_jsonl(stage.input)) {
      if (!j.contains("id")) throw SchemaError(stage.input + ": feature record without \"id\"");
      rows.ids.push_back(j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump());
      rows.rows.push_back(features_from_json(j));
    }
  } else {
    rows = compute_features(stage.input, stage.corpus, stage.jobs, report);
  }

  std::vector<std::string> features;
  if (stage.all_features) {
    for (std::string_view name : FeatureVector::kNames) features.emplace_back(name);
  }
  SuitabilityReport fit = fit_suitability(rows.ids, rows.rows, features);

  OutputFile out(stage.output);
  for (std::size_t i = 0; i < fit.ids.size(); ++i) {
    out.stream() << ordered_json{{"id", fit.ids[i]}, {"score", fit.scores[i]}}.dump() << "\n";
  }
  out.close();

  ordered_json model = model_to_json(fit.model);
  model["corpus_sha256"] = file_sha256(stage.input);
  model["samples"] = fit.ids.size();
  model["toolkit"] = version_string();
  write_json_file(stage.model_output.empty() ? stage.output + ".model.json" : stage.model_output, model);
  return report;
}

StageReport run_select(const SelectStage& stage) {
  if (!stage.report.empty() && stage.labels.empty()) throw UsageError("--report needs --labels");
  StageReport report;
  SuitabilityReport scores;
  for (const json& j : read_jsonl(stage.scores)) {
    if (!j.contains("id") || !j.contains("score") || !j["score"].is_number()) {
      throw SchemaError(stage.scores + ": score records need \"id\" and numeric \"score\"");
    }
    scores.ids.push_back(j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump());
    scores.scores.push_back(j["score"].get<double>());
  }
  CarrierSet carriers = select_carriers(scores, stage.tau);
  OutputFile out(stage.output);
  for (const std::string& id : carriers.ids) out.stream() << id << "\n";
  out.close();

  if (!stage.labels.empty()) {
    SelectionMetrics m = evaluate_selection(scores, stage.tau, read_labels(stage.labels));
    append(report.warnings, m.warnings);
    if (!stage.report.empty()) {
      write_json_file(stage.report, {{"tau", stage.tau},
                                     {"threshold", carriers.threshold},
                                     {"carriers", carriers.ids.size()},
                                     {"precision", m.precision},
                                     {"recall", m.recall},
                                     {"f1", m.f1},
                                     {"true_positives", m.true_positives},
                                     {"false_positives", m.false_positives},
                                     {"false_negatives", m.false_negatives},
                                     {"warnings", m.warnings}});
    }
  }
  return report;
}

// Two passes over the corpus: the first classifies every carrier and plans
// admissions, the second re-embeds the admitted ones while writing out.
// Only per-sample candidates are held in memory.
StageReport run_embed(const EmbedStage& stage) {
  stage.config.validate();
  StageReport report;
  std::optional<std::set<std::string, std::less<>>> carriers;
  if (!stage.carriers.empty()) carriers = read_id_set(stage.carriers);
  if (!stage.only_ids.empty()) {
    auto only = read_id_set(stage.only_ids);
    if (carriers) {
      std::erase_if(*carriers, [&](const std::string& id) { return only.count(id) == 0; });
    } else {
      carriers = std::move(only);
    }
  }

  std::size_t corpus_size = 0;
  std::vector<Candidate> candidates;
  std::vector<std::size_t> positions;  // candidate -> record position
  std::map<std::size_t, std::string> early_skips;  // unparseable carriers
  auto warnings = for_each_batch(stage.input, stage.corpus, [&](const std::vector<CorpusRecord>& batch) {
    std::vector<std::optional<Candidate>> found(batch.size());
    std::vector<bool> unparseable(batch.size(), false);
    parallel_for(batch.size(), stage.jobs, [&](std::size_t i) {
      if (carriers && carriers->count(batch[i].sample.id) == 0) return;
      try {
        CarrierAttempt a = attempt_carrier(batch[i].sample, stage.config);
        found[i] = Candidate{a.group, a.outcome.record.watermarked, a.outcome.record.skip_reason};
      } catch (const ParseError&) {
        unparseable[i] = true;
      }
    });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (found[i]) {
        candidates.push_back(std::move(*found[i]));
        positions.push_back(corpus_size + i);
      } else if (unparseable[i]) {
        early_skips[corpus_size + i] = std::string(skip::kUnparseable);
      }
    }
    corpus_size += batch.size();
  });
  append(report.warnings, warnings);

  RateBounds bounds = rate_bounds(corpus_size, stage.config.rho_min, stage.config.rho_max);
  append(report.warnings, bounds.warnings);
  AdmissionPlan plan = plan_admissions(candidates, bounds, stage.config);
  append(report.warnings, plan.warnings);

  std::vector<std::string> reason(corpus_size, std::string(skip::kNotCarrier));
  for (const auto& [pos, why] : early_skips) reason[pos] = why;
  std::vector<bool> admitted(corpus_size, false);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    admitted[positions[k]] = plan.admitted[k];
    reason[positions[k]] = plan.reasons[k];
  }

  OutputFile out(stage.output);
  OutputFile manifest(stage.manifest);
  std::size_t position = 0;
  for_each_batch(stage.input, stage.corpus, [&](const std::vector<CorpusRecord>& batch) {
    std::vector<std::optional<EmbedOutcome>> outcomes(batch.size());
    parallel_for(batch.size(), stage.jobs, [&](std::size_t i) {
      if (admitted[position + i]) outcomes[i] = attempt_carrier(batch[i].sample, stage.config).outcome;
    });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (outcomes[i]) {
        if (!outcomes[i]->record.watermarked) {
          throw DataError("sample \"" + batch[i].sample.id + "\" no longer embeds on the second pass");
        }
        out.stream() << replace_json_string_field(batch[i].raw, stage.corpus.code_field,
                                                  outcomes[i]->sample.code)
                     << "\n";
        manifest.stream() << record_to_json(outcomes[i]->record).dump() << "\n";
      } else {
        out.stream() << batch[i].raw << "\n";
        WatermarkRecord skipped;
        skipped.id = batch[i].sample.id;
        skipped.skip_reason = reason[position + i];
        manifest.stream() << record_to_json(skipped).dump() << "\n";
      }
    }
    position += batch.size();
  });
  out.close();
  manifest.close();
  return report;
}

StageReport run_build_validation(const ValidationStage& stage) {
  StageReport report;
  std::vector<WatermarkRecord> marked;
  std::map<std::string, std::size_t, std::less<>> by_id;
  for (const json& j : read_jsonl(stage.manifest)) {
    WatermarkRecord r = record_from_json(j);
    if (!r.watermarked) continue;
    by_id[r.id] = marked.size();
    marked.push_back(std::move(r));
  }
  std::vector<std::optional<CodeSample>> samples(marked.size());
  auto warnings = for_each_batch(stage.corpus_path, stage.corpus, [&](const std::vector<CorpusRecord>& batch) {
    for (const CorpusRecord& rec : batch) {
      auto it = by_id.find(rec.sample.id);
      if (it != by_id.end()) samples[it->second] = rec.sample;
    }
  });
  append(report.warnings, warnings);

  std::vector<CodeSample> corpus;
  for (std::size_t i = 0; i < marked.size(); ++i) {
    if (!samples[i]) throw SchemaError("manifest id \"" + marked[i].id + "\" missing from the corpus");
    corpus.push_back(std::move(*samples[i]));
  }
  std::vector<ValidationPair> pairs = build_validation_set(
      marked, corpus, stage.n, stage_seed(stage.seed, "build-validation"), stage.strategy);
  OutputFile out(stage.output);
  for (const ValidationPair& p : pairs) out.stream() << pair_to_json(p).dump() << "\n";
  out.close();
  return report;
}

std::string result_line(const VerificationResult& result) { return result_to_json(result).dump(); }

VerificationResult run_verify(const VerifyStage& stage, StageReport* report) {
  std::vector<ValidationPair> pairs;
  for (const json& j : read_jsonl(stage.pairs)) pairs.push_back(pair_from_json(j));
  if (pairs.empty()) throw DataError("no validation pairs in " + stage.pairs);
  if (stage.model.empty()) throw UsageError("no model given (--model or PUZZLEMARK_MODEL_URL)");
  std::unique_ptr<CompletionClient> client = make_client(stage.model);
  VerificationResult result = verify(pairs, *client, stage.options);

  if (!stage.output.empty()) {
    OutputFile out(stage.output);
    out.stream() << result_line(result) << "\n";
    out.close();
  }
  if (!stage.observations.empty()) {
    OutputFile out(stage.observations);
    for (const Observation& o : result.observations) {
      out.stream() << ordered_json{{"index", o.index},
                           {"id", pairs[o.index / 2].id},
                           {"group", o.trigger_group ? "trigger" : "control"},
                           {"completion", o.completion},
                           {"bit", o.bit ? 1 : 0}}
                          .dump()
                   << "\n";
    }
    out.close();
  }
  if (report && result.table.a + result.table.c == 0) {
    report->warnings.push_back("no target emitted in either group; p-value is 1");
  }
  return result;
}

VerificationResult run_pipeline(const PipelineConfig& config, StageReport* report) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.work_dir, ec);
  if (ec) throw IoError("cannot create work directory " + config.work_dir + ": " + ec.message());
  auto at = [&](const char* name) { return (fs::path(config.work_dir) / name).string(); };
  StageReport all;

  ScoreStage score{config.input, at("scores.jsonl"), at("model.json"), config.corpus, config.all_features,
                   config.jobs};
  append(all.warnings, run_score(score).warnings);

  SelectStage select{at("scores.jsonl"), at("carriers.txt"), config.tau, "", ""};
  append(all.warnings, run_select(select).warnings);

  EmbedStage embed;
  embed.input = config.input;
  embed.output = at("watermarked.jsonl");
  embed.manifest = at("manifest.jsonl");
  embed.carriers = at("carriers.txt");
  embed.corpus = config.corpus;
  embed.config = config.embed;
  embed.config.seed = config.seed;
  embed.jobs = config.jobs;
  append(all.warnings, run_embed(embed).warnings);

  ValidationStage validation;
  validation.corpus_path = at("watermarked.jsonl");
  validation.manifest = at("manifest.jsonl");
  validation.output = at("validation.jsonl");
  validation.corpus = config.corpus;
  validation.n = config.validation_n;
  validation.seed = config.seed;
  validation.strategy = config.embed.strategy;
  append(all.warnings, run_build_validation(validation).warnings);

  VerifyStage verify_stage{at("validation.jsonl"), config.model, at("verdict.json"), at("observations.jsonl"),
                           config.verify};
  VerificationResult result = run_verify(verify_stage, &all);
  if (report) append(report->warnings, all.warnings);
  return result;
}

}  // namespace varcat
