#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "synthetic_corpus.hpp"
#include "varcat/pipeline.hpp"

namespace fs = std::filesystem;

namespace varcat {
namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("varcat-test-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string corpus_file(const TempDir& dir, std::size_t size, std::uint64_t seed = 1) {
  testing::CorpusShape shape;
  shape.size = size;
  shape.seed = seed;
  std::string path = dir / "corpus.jsonl";
  testing::write_jsonl(path, testing::synthetic_corpus(shape));
  return path;
}

PipelineConfig pipeline_config(const std::string& input, const std::string& work_dir) {
  PipelineConfig c;
  c.input = input;
  c.work_dir = work_dir;
  c.embed.prefix = "key";
  c.embed.rho_min = 0.05;
  c.embed.rho_max = 0.2;
  c.validation_n = 40;
  c.model = "sim:watermarked?pt=0.5&pc=0.01&seed=42";
  c.seed = 9;
  c.jobs = 2;
  return c;
}

TEST(ReplaceField, OnlyTheValueSpanChanges) {
  std::string line = R"({ "id" : 7,  "code":"a\nb" , "meta": {"code": "inner"}, "z": "\u00e9"})";
  std::string out = replace_json_string_field(line, "code", "x = \"q\"\n");
  EXPECT_EQ(out, R"({ "id" : 7,  "code":"x = \"q\"\n" , "meta": {"code": "inner"}, "z": "\u00e9"})");
  EXPECT_EQ(nlohmann::json::parse(out)["code"], "x = \"q\"\n");
}

TEST(ReplaceField, NestedFieldWithSameNameIsIgnored) {
  std::string line = R"({"meta": {"code": "inner"}, "code": "outer"})";
  EXPECT_EQ(replace_json_string_field(line, "code", "new"), R"({"meta": {"code": "inner"}, "code": "new"})");
}

TEST(CorpusReader, MissingCodeFieldNamesTheLine) {
  TempDir dir;
  spit(dir / "c.jsonl", "{\"id\": \"a\", \"code\": \"def f(x):\\n    return x\\n\", \"language\": \"python\"}\n"
                        "{\"id\": \"b\", \"text\": \"nope\"}\n");
  try {
    load_corpus(dir / "c.jsonl", {});
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  CorpusOptions lenient;
  lenient.lenient = true;
  EXPECT_EQ(load_corpus(dir / "c.jsonl", lenient).size(), 1u);
}

TEST(CorpusReader, IdsAndLanguages) {
  TempDir dir;
  spit(dir / "c.jsonl", "{\"code\": \"def f(x):\\n    return x\\n\"}\n"
                        "{\"id\": 12, \"code\": \"void f(int x) {}\", \"language\": \"java\"}\n"
                        "not json\n");
  CorpusOptions options;
  options.lenient = true;
  options.language = Language::kPython;
  auto records = load_corpus(dir / "c.jsonl", options);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].sample.id, "1");
  EXPECT_EQ(records[1].sample.id, "12");
  EXPECT_EQ(records[1].sample.language, Language::kPython);
  // without --lang the first record has no language and is skipped
  options.language.reset();
  records = load_corpus(dir / "c.jsonl", options);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].sample.language, Language::kJava);
  spit(dir / "d.jsonl", "{\"id\": \"a\", \"code\": \"x\", \"language\": \"python\"}\n"
                        "{\"id\": \"a\", \"code\": \"y\", \"language\": \"python\"}\n");
  EXPECT_THROW(load_corpus(dir / "d.jsonl", {}), SchemaError);
}

TEST(Stages, EmptyCorpusIsDegenerate) {
  TempDir dir;
  spit(dir / "empty.jsonl", "");
  ScoreStage score;
  score.input = dir / "empty.jsonl";
  score.output = dir / "scores.jsonl";
  EXPECT_THROW(run_score(score), DegenerateCorpus);
}

TEST(Stages, SelectReportNeedsLabels) {
  TempDir dir;
  SelectStage select;
  select.scores = dir / "missing.jsonl";
  select.output = dir / "out.txt";
  select.report = dir / "report.json";
  EXPECT_THROW(run_select(select), UsageError);
}

// Running the stages one by one gives the same files as the pipeline.
TEST(Stages, ComposeToThePipeline) {
  TempDir dir;
  std::string input = corpus_file(dir, 400);
  PipelineConfig config = pipeline_config(input, dir / "work");
  VerificationResult whole = run_pipeline(config);

  ScoreStage score{input, dir / "scores.jsonl", dir / "model.json", {}, false, 1};
  run_score(score);
  run_select(SelectStage{dir / "scores.jsonl", dir / "carriers.txt", config.tau, "", ""});
  EmbedStage embed;
  embed.input = input;
  embed.output = dir / "watermarked.jsonl";
  embed.manifest = dir / "manifest.jsonl";
  embed.carriers = dir / "carriers.txt";
  embed.config = config.embed;
  embed.config.seed = config.seed;
  run_embed(embed);
  ValidationStage validation;
  validation.corpus_path = dir / "watermarked.jsonl";
  validation.manifest = dir / "manifest.jsonl";
  validation.output = dir / "validation.jsonl";
  validation.n = config.validation_n;
  validation.seed = config.seed;
  run_build_validation(validation);
  VerifyStage verify{dir / "validation.jsonl", config.model, dir / "verdict.json", dir / "observations.jsonl", {}};
  VerificationResult split = run_verify(verify);

  for (const char* name : {"scores.jsonl", "model.json", "carriers.txt", "watermarked.jsonl", "manifest.jsonl",
                           "validation.jsonl", "verdict.json", "observations.jsonl"}) {
    EXPECT_EQ(slurp(dir / name), slurp(dir.path() / "work" / name)) << name;
  }
  EXPECT_EQ(split.table, whole.table);
  EXPECT_EQ(whole.verdict(), "watermarked");
}

TEST(Stages, PipelineIsDeterministicAcrossJobCounts) {
  TempDir dir;
  std::string input = corpus_file(dir, 300, 4);
  PipelineConfig a = pipeline_config(input, dir / "a");
  PipelineConfig b = pipeline_config(input, dir / "b");
  a.jobs = 1;
  b.jobs = 3;
  b.verify.jobs = 1;
  run_pipeline(a);
  run_pipeline(b);
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    std::string name = entry.path().filename().string();
    EXPECT_EQ(slurp(entry.path()), slurp(dir.path() / "b" / name)) << name;
  }
}

// Records that carry no watermark are written back byte for byte, and the
// manifest has one line per input record.
TEST(Stages, EmbedPassesUntouchedRecordsThrough) {
  TempDir dir;
  std::string input = corpus_file(dir, 200);
  std::string text = slurp(input);
  // odd but valid spacing and an extra field must survive
  std::vector<std::string> in_lines = lines_of(text);
  in_lines[0].insert(1, "  \"extra\" : [1, 2.50, \"\\u0041\"] ,");
  std::string rewritten;
  for (const std::string& l : in_lines) rewritten += l + "\n";
  spit(input, rewritten);

  EmbedStage embed;
  embed.input = input;
  embed.output = dir / "out.jsonl";
  embed.manifest = dir / "manifest.jsonl";
  embed.config.prefix = "key";
  embed.config.rho_max = 0.1;
  run_embed(embed);
  std::vector<std::string> out_lines = lines_of(slurp(dir / "out.jsonl"));
  std::vector<std::string> manifest = lines_of(slurp(dir / "manifest.jsonl"));
  ASSERT_EQ(out_lines.size(), in_lines.size());
  ASSERT_EQ(manifest.size(), in_lines.size());
  std::size_t marked = 0;
  for (std::size_t i = 0; i < in_lines.size(); ++i) {
    nlohmann::json record = nlohmann::json::parse(manifest[i]);
    if (record.value("watermarked", false)) {
      ++marked;
      EXPECT_NE(out_lines[i], in_lines[i]);
    } else {
      EXPECT_EQ(out_lines[i], in_lines[i]);
    }
  }
  EXPECT_GT(marked, 0u);
  EXPECT_LE(marked, 20u);
}

int run_cli(const std::string& args) {
  int status = std::system((std::string(VARCAT_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  std::string input = corpus_file(dir, 400);
  EXPECT_EQ(run_cli("--version"), 0);
  EXPECT_EQ(run_cli("features --bogus-flag"), 1);
  EXPECT_EQ(run_cli(""), 1);
  spit(dir / "bad.jsonl", "{\"id\": \"a\", \"language\": \"python\"}\n");
  EXPECT_EQ(run_cli("features --input " + (dir / "bad.jsonl") + " --output " + (dir / "f.jsonl")), 2);
  EXPECT_EQ(run_cli("pipeline --input " + input + " --work-dir " + (dir / "w") + " --prefix key -n 10" +
                    " --model http://127.0.0.1:1/none"),
            3);
  EXPECT_EQ(run_cli("pipeline --input " + input + " --work-dir " + (dir / "w2") + " --prefix key -n 10" +
                    " --model 'sim:watermarked?pt=0.5&pc=0.01&seed=1'"),
            0);
}

TEST(Cli, ErrorMessageNamesTheLine) {
  TempDir dir;
  spit(dir / "bad.jsonl", "{\"id\": \"a\", \"code\": \"def f(x):\\n    return x\\n\", \"language\": \"python\"}\n"
                          "{\"id\": \"b\"}\n");
  std::string cmd = std::string(VARCAT_CLI) + " features --input " + (dir / "bad.jsonl") + " --output " +
                    (dir / "f.jsonl") + " 2>" + (dir / "err.txt");
  std::system(cmd.c_str());
  std::string err = slurp(dir / "err.txt");
  EXPECT_NE(err.find("bad.jsonl:2:"), std::string::npos) << err;
}

}  // namespace
}  // namespace varcat
