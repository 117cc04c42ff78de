// varcat command-line driver: one subcommand per pipeline stage plus
// `pipeline`, which chains them. Exit codes: 0 ok, 1 usage, 2 data, 3 model.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "varcat/errors.hpp"
#include "varcat/pipeline.hpp"

namespace {

using namespace varcat;

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kModel = 3;

struct CorpusFlags {
  std::string code_field = "code";
  std::string id_field = "id";
  std::string lang;
  bool lenient = false;

  void add(CLI::App* app) {
    app->add_option("--code-field", code_field, "JSON field holding the source code");
    app->add_option("--id-field", id_field, "JSON field holding the sample id");
    app->add_option("--lang", lang, "python or java (default: each record's \"language\")");
    app->add_flag("--lenient", lenient, "skip malformed lines instead of failing");
  }

  CorpusOptions options() const {
    CorpusOptions o;
    o.code_field = code_field;
    o.id_field = id_field;
    o.lenient = lenient;
    if (!lang.empty()) {
      o.language = parse_language(lang);
      if (!o.language) throw UsageError("unknown --lang '" + lang + "'");
    }
    return o;
  }
};

struct EmbedFlags {
  std::string strategy = "fixed";
  std::string prefix;
  std::string convention = "snake";
  double rho_min = 0.01;
  double rho_max = 0.05;
  std::string order = "corpus";

  void add(CLI::App* app) {
    app->add_option("--strategy", strategy, "fixed or universal")->capture_default_str();
    app->add_option("--prefix", prefix, "trigger prefix for the fixed strategy");
    app->add_option("--convention", convention, "snake or camel")->capture_default_str();
    app->add_option("--rho-min", rho_min, "minimum embedding rate")->capture_default_str();
    app->add_option("--rho-max", rho_max, "maximum embedding rate")->capture_default_str();
    app->add_option("--order", order, "corpus or shuffle")->capture_default_str();
  }

  EmbedConfig config(std::uint64_t seed) const {
    EmbedConfig c;
    auto s = parse_strategy(strategy);
    if (!s) throw UsageError("unknown --strategy '" + strategy + "'");
    auto n = parse_convention(convention);
    if (!n) throw UsageError("unknown --convention '" + convention + "'");
    auto o = parse_order(order);
    if (!o) throw UsageError("unknown --order '" + order + "'");
    c.strategy = *s;
    c.prefix = prefix;
    c.convention = *n;
    c.rho_min = rho_min;
    c.rho_max = rho_max;
    c.order = *o;
    c.seed = seed;
    c.validate();
    return c;
  }
};

struct VerifyFlags {
  std::string model;
  double alpha = 0.05;
  bool two_sided = false;
  int max_tokens = 32;
  double temperature = 1.0;
  std::string journal;
  bool substring = false;
  std::string control_target = "renamed";
  std::size_t jobs = 4;

  void add(CLI::App* app) {
    app->add_option("--model", model, "model URI (http(s)://..., sim:watermarked?..., sim:clean?...)");
    app->add_option("--alpha", alpha, "significance level")->capture_default_str();
    app->add_flag("--two-sided", two_sided, "two-sided instead of one-sided Fisher test");
    app->add_option("--max-tokens", max_tokens, "completion length")->capture_default_str();
    app->add_option("--temperature", temperature, "sampling temperature")->capture_default_str();
    app->add_option("--journal", journal, "append-only query journal, reused on resume");
    app->add_flag("--substring", substring, "count substring matches, not whole identifiers");
    app->add_option("--control-target", control_target, "renamed or original")->capture_default_str();
    app->add_option("--query-jobs", jobs, "concurrent model queries")->capture_default_str();
  }

  std::string resolved_model() const {
    if (!model.empty()) return model;
    const char* env = std::getenv("PUZZLEMARK_MODEL_URL");
    return env ? env : "";
  }

  VerifyOptions options() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
    if (max_tokens <= 0) throw UsageError("--max-tokens must be positive");
    VerifyOptions o;
    o.alpha = alpha;
    o.sidedness = two_sided ? Sidedness::kTwoSided : Sidedness::kGreater;
    o.max_tokens = max_tokens;
    o.temperature = temperature;
    o.jobs = std::max<std::size_t>(1, jobs);
    o.substring_match = substring;
    std::optional<ControlTarget> ct = parse_control_target(control_target);
    if (!ct) throw UsageError("--control-target must be renamed or original");
    o.control_target = *ct;
    o.journal_path = journal;
    return o;
  }
};

void print_warnings(const StageReport& report) {
  for (const std::string& w : report.warnings) std::cerr << "warning: " << w << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Dataset watermarking by variable-name concatenation", "varcat"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::size_t jobs = 0;
  std::uint64_t seed = 0;
  app.add_option("--jobs", jobs, "worker threads (0: all cores)");
  app.add_option("--seed", seed, "root seed; stages derive their own")->capture_default_str();

  // features
  CLI::App* features = app.add_subcommand("features", "per-sample complexity features as JSONL");
  FeaturesStage fs;
  CorpusFlags fs_corpus;
  features->add_option("--input", fs.input, "corpus JSONL")->required();
  features->add_option("--output", fs.output, "features JSONL")->required();
  fs_corpus.add(features);

  // score
  CLI::App* score = app.add_subcommand("score", "fit the suitability projection and score samples");
  ScoreStage ss;
  CorpusFlags ss_corpus;
  score->add_option("--input", ss.input, "corpus or features JSONL")->required();
  score->add_option("--output", ss.output, "scores JSONL")->required();
  score->add_option("--model-out", ss.model_output, "sidecar model file (default: OUTPUT.model.json)");
  score->add_flag("--all-features", ss.all_features, "project all ten features instead of seven");
  ss_corpus.add(score);

  // select
  CLI::App* select = app.add_subcommand("select", "keep samples scoring at or above the tau quantile");
  SelectStage sel;
  select->add_option("--scores", sel.scores, "scores JSONL")->required();
  select->add_option("--output", sel.output, "carrier ids, one per line")->required();
  select->add_option("--tau", sel.tau, "quantile threshold")->capture_default_str();
  select->add_option("--labels", sel.labels, "{\"id\",\"label\"} JSONL for evaluation");
  select->add_option("--report", sel.report, "precision/recall/F1 JSON (needs --labels)");

  // embed
  CLI::App* embed = app.add_subcommand("embed", "embed the watermark into carrier samples");
  EmbedStage es;
  CorpusFlags es_corpus;
  EmbedFlags es_flags;
  embed->add_option("--input", es.input, "corpus JSONL")->required();
  embed->add_option("--output", es.output, "watermarked corpus JSONL")->required();
  embed->add_option("--manifest", es.manifest, "manifest JSONL")->required();
  embed->add_option("--carriers", es.carriers, "carrier id list (default: every sample)");
  embed->add_option("--only-ids", es.only_ids, "restrict embedding to these ids");
  es_corpus.add(embed);
  es_flags.add(embed);

  // build-validation
  CLI::App* build = app.add_subcommand("build-validation", "build trigger and control prompts");
  ValidationStage vs;
  CorpusFlags vs_corpus;
  std::string vs_strategy = "fixed";
  build->add_option("--input", vs.corpus_path, "watermarked corpus JSONL")->required();
  build->add_option("--manifest", vs.manifest, "manifest JSONL")->required();
  build->add_option("--output", vs.output, "validation pairs JSONL")->required();
  build->add_option("-n,--count", vs.n, "number of pairs")->capture_default_str();
  build->add_option("--strategy", vs_strategy, "fixed or universal")->capture_default_str();
  vs_corpus.add(build);

  // verify
  CLI::App* verify_cmd = app.add_subcommand("verify", "query the model and run Fisher's exact test");
  VerifyStage vf;
  VerifyFlags vf_flags;
  verify_cmd->add_option("--pairs", vf.pairs, "validation pairs JSONL")->required();
  verify_cmd->add_option("--output", vf.output, "result JSON file");
  verify_cmd->add_option("--observations", vf.observations, "per-query audit JSONL");
  vf_flags.add(verify_cmd);

  // pipeline
  CLI::App* pipeline = app.add_subcommand("pipeline", "score, select, embed, build-validation, verify");
  PipelineConfig pc;
  CorpusFlags pc_corpus;
  EmbedFlags pc_embed;
  VerifyFlags pc_verify;
  pipeline->add_option("--input", pc.input, "corpus JSONL")->required();
  pipeline->add_option("--work-dir", pc.work_dir, "directory for intermediate artifacts")
      ->default_val("varcat-work");
  pipeline->add_option("--tau", pc.tau, "quantile threshold")->capture_default_str();
  pipeline->add_option("-n,--count", pc.validation_n, "validation pairs")->capture_default_str();
  pipeline->add_flag("--all-features", pc.all_features, "project all ten features");
  pc_corpus.add(pipeline);
  pc_embed.add(pipeline);
  pc_verify.add(pipeline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  const std::size_t workers = jobs == 0 ? default_jobs() : jobs;
  if (features->parsed()) {
    fs.corpus = fs_corpus.options();
    fs.jobs = workers;
    print_warnings(run_features(fs));
  } else if (score->parsed()) {
    ss.corpus = ss_corpus.options();
    ss.jobs = workers;
    print_warnings(run_score(ss));
  } else if (select->parsed()) {
    print_warnings(run_select(sel));
  } else if (embed->parsed()) {
    es.corpus = es_corpus.options();
    es.config = es_flags.config(seed);
    es.jobs = workers;
    print_warnings(run_embed(es));
  } else if (build->parsed()) {
    auto s = parse_strategy(vs_strategy);
    if (!s) throw UsageError("unknown --strategy '" + vs_strategy + "'");
    vs.strategy = *s;
    vs.corpus = vs_corpus.options();
    vs.seed = seed;
    print_warnings(run_build_validation(vs));
  } else if (verify_cmd->parsed()) {
    vf.model = vf_flags.resolved_model();
    vf.options = vf_flags.options();
    StageReport report;
    VerificationResult result = run_verify(vf, &report);
    print_warnings(report);
    std::cout << result_line(result) << "\n";
  } else if (pipeline->parsed()) {
    pc.corpus = pc_corpus.options();
    pc.embed = pc_embed.config(seed);
    pc.model = pc_verify.resolved_model();
    pc.verify = pc_verify.options();
    pc.seed = seed;
    pc.jobs = workers;
    if (pc.model.empty()) throw UsageError("no model given (--model or PUZZLEMARK_MODEL_URL)");
    StageReport report;
    VerificationResult result = run_pipeline(pc, &report);
    print_warnings(report);
    std::cout << result_line(result) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const varcat::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nRun with --help for the list of options.\n";
    return kUsage;
  } catch (const varcat::ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kModel;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
}
