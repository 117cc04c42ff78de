#include <gtest/gtest.h>

#include "synthetic_corpus.hpp"
#include "token_diff.hpp"
#include "varcat/embedding.hpp"
#include "varcat/metrics.hpp"

namespace varcat {
namespace {

const char* kFind =
    "def find(key, iterator):\n"
    "    for a in iterator:\n"
    "        if a == key:\n"
    "            return a\n"
    "    return None\n";

CodeSample py(std::string code, std::string id = "t") { return {std::move(id), std::move(code), Language::kPython}; }

EmbedConfig fixed(std::string prefix = "key") {
  EmbedConfig c;
  c.prefix = std::move(prefix);
  return c;
}

std::vector<const VariableEntry*> pointers(const VariableTable& t, std::initializer_list<const char*> names) {
  std::vector<const VariableEntry*> out;
  for (const char* n : names) out.push_back(t.find(n));
  return out;
}

TEST(Concat, Conventions) {
  EXPECT_EQ(concat("key", "iterator", NamingConvention::kSnakeCase), "key_iterator");
  EXPECT_EQ(concat("key", "unknown_token", NamingConvention::kSnakeCase), "key_unknown_token");
  EXPECT_EQ(concat("key", "count", NamingConvention::kCamelCase), "keyCount");
  EXPECT_EQ(concat("key", "xValue", NamingConvention::kCamelCase), "keyXValue");
}

TEST(ChooseSuffix, FollowsThePrefix) {
  VariableTable t = extract_variables(parse(py(kFind)));
  auto c = choose_suffix(t, 0);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->suffix, "iterator");
  ASSERT_EQ(c->later.size(), 2u);
  EXPECT_EQ(c->later[1]->name, "a");
  VariableTable two = extract_variables(parse(py("def f(key, x):\n    return x\n")));
  EXPECT_FALSE(choose_suffix(two, 0));
  VariableTable one = extract_variables(parse(py("def f(key):\n    return key\n")));
  EXPECT_FALSE(choose_suffix(one, 0));
}

TEST(ReplacementTarget, LowestFrequencyWins) {
  VariableTable t = extract_variables(
      parse(py("def f(key, it, a, total):\n    return total + total + total\n")));
  auto got = select_replacement_target(pointers(t, {"a", "total"}), t, "key_it", NamingConvention::kSnakeCase);
  ASSERT_TRUE(got);
  EXPECT_EQ(*got, "a");
}

TEST(ReplacementTarget, MostFrequentCompoundWins) {
  VariableTable t = extract_variables(
      parse(py("def f(key, it, x_y, z):\n    return x_y + x_y\n")));
  auto got = select_replacement_target(pointers(t, {"x_y", "z"}), t, "key_it", NamingConvention::kSnakeCase);
  ASSERT_TRUE(got);
  EXPECT_EQ(*got, "x_y");
}

TEST(ReplacementTarget, TiesGoToEarliest) {
  VariableTable t = extract_variables(parse(py("def f(key, it, b, a):\n    return a + b\n")));
  auto got = select_replacement_target(pointers(t, {"b", "a"}), t, "key_it", NamingConvention::kSnakeCase);
  EXPECT_EQ(*got, "b");
}

TEST(ReplacementTarget, ExistingTargetIsLeftAlone) {
  VariableTable t = extract_variables(parse(py("def f(key, it, key_it):\n    return key_it\n")));
  EXPECT_FALSE(select_replacement_target(pointers(t, {"key_it"}), t, "key_it", NamingConvention::kSnakeCase));
}

TEST(EmbedOne, FindSnippet) {
  CodeSample s = py(kFind);
  EmbedOutcome out = embed_one(s, extract_variables(parse(s)), "key", fixed());
  EXPECT_TRUE(out.record.watermarked);
  EXPECT_EQ(out.record.target, "key_iterator");
  EXPECT_EQ(out.record.replaced, "a");
  EXPECT_EQ(out.record.suffix, "iterator");
  ASSERT_EQ(out.record.renames.size(), 1u);
  EXPECT_EQ(out.record.renames[0], (RenameEdit{"a", "key_iterator", 3}));
  EXPECT_NE(out.sample.code.find("for key_iterator in iterator:"), std::string::npos);
}

TEST(EmbedOne, ShortTableIsSkipped) {
  CodeSample s = py("def f(key, x):\n    return x\n");
  EmbedOutcome out = embed_one(s, extract_variables(parse(s)), "key", fixed());
  EXPECT_FALSE(out.record.watermarked);
  EXPECT_EQ(out.record.skip_reason, skip::kSuffixUnavailable);
  EXPECT_EQ(out.sample, s);
}

TEST(EmbedOne, PreexistingTargetNeedsNoEdit) {
  CodeSample s = py("def f(key, items, key_items):\n    key_items = items[key]\n    return key_items\n");
  EmbedOutcome out = embed_one(s, extract_variables(parse(s)), "key", fixed());
  EXPECT_TRUE(out.record.watermarked);
  EXPECT_TRUE(out.record.renames.empty());
  EXPECT_TRUE(out.record.replaced.empty());
  EXPECT_EQ(out.sample.code, s.code);
}

TEST(EmbedOne, TargetNamingSomethingElseIsACollision) {
  CodeSample s = py("def f(key, items, x):\n    return key_items(x)\n");
  EmbedOutcome out = embed_one(s, extract_variables(parse(s)), "key", fixed());
  EXPECT_FALSE(out.record.watermarked);
  EXPECT_EQ(out.record.skip_reason, skip::kCollision);
  EXPECT_EQ(out.sample, s);
}

TEST(AttemptCarrier, AbsentPrefixIsInjected) {
  CodeSample s = py("def f(needle, items):\n    for x in items:\n        if x == needle:\n            return x\n");
  CarrierAttempt a = attempt_carrier(s, fixed());
  EXPECT_EQ(a.group, CarrierGroup::kAbsent);
  ASSERT_TRUE(a.outcome.record.watermarked);
  EXPECT_TRUE(a.outcome.record.prefix_injected);
  ASSERT_EQ(a.outcome.record.renames.size(), 2u);
  EXPECT_EQ(a.outcome.record.renames[0], (RenameEdit{"needle", "key", 2}));
  EXPECT_EQ(a.outcome.record.renames[1], (RenameEdit{"x", "key_items", 3}));
  EXPECT_EQ(replay(s, a.outcome.record), a.outcome.sample);
  EXPECT_EQ(testing::renamed_identifiers(s, a.outcome.sample), (std::set<std::string>{"needle", "x"}));
}

TEST(AttemptCarrier, FailedInjectionLeavesSampleUntouched) {
  // only two variables once key is injected
  CodeSample s = py("def f(needle, items):\n    return items[needle]\n");
  CarrierAttempt a = attempt_carrier(s, fixed());
  EXPECT_FALSE(a.outcome.record.watermarked);
  EXPECT_EQ(a.outcome.sample, s);
  // the prefix already names a function called in the body
  CodeSample c = py("def f(needle, items, x):\n    return key(items, x, needle)\n");
  EXPECT_EQ(attempt_carrier(c, fixed()).outcome.record.skip_reason, skip::kCollision);
}

TEST(AttemptCarrier, ReservedPrefixIsRejected) {
  CarrierAttempt a = attempt_carrier(py(kFind), fixed("lambda"));
  EXPECT_FALSE(a.outcome.record.watermarked);
  EXPECT_EQ(a.outcome.record.skip_reason, skip::kInvalidPrefix);
}

TEST(AttemptCarrier, UnparseableThrows) {
  EXPECT_THROW(attempt_carrier(py("def f(:\n"), fixed()), ParseError);
}

TEST(Universal, FirstTwoVariablesByOffset) {
  VariableTable t = extract_variables(parse(py("def f(alpha, beta):\n    gamma = alpha\n    return gamma\n")));
  auto ps = derive_universal_prefix(t);
  ASSERT_TRUE(ps);
  EXPECT_EQ(ps->first, "alpha");
  EXPECT_EQ(ps->second, "beta");
  EXPECT_FALSE(derive_universal_prefix(extract_variables(parse(py("def f(x):\n    return x\n")))));
}

// Offset oracle: scan identifier leaves and keep the first two distinct names
// that are variables.
TEST(Universal, FindSnippetMatchesOffsetOracle) {
  CodeSample s = py(kFind);
  SyntaxTree tree = parse(s);
  VariableTable table = extract_variables(tree);
  std::vector<std::string> order;
  for (const Node* leaf : leaves(tree.function())) {
    std::string text(tree.text(*leaf));
    if (leaf->kind == leaf::kIdentifier && table.contains(text) &&
        std::find(order.begin(), order.end(), text) == order.end()) {
      order.push_back(text);
    }
  }
  auto ps = derive_universal_prefix(table);
  EXPECT_EQ(ps->first, order[0]);
  EXPECT_EQ(ps->second, order[1]);

  EmbedConfig config;
  config.strategy = Strategy::kUniversal;
  CarrierAttempt a = attempt_carrier(s, config);
  EXPECT_EQ(a.group, CarrierGroup::kUniversal);
  EXPECT_EQ(a.outcome.record.target, "key_iterator");
  EXPECT_FALSE(a.outcome.record.prefix_injected);
}

TEST(RateBounds, CountsFromRates) {
  RateBounds b = rate_bounds(1000, 0.01, 0.05);
  EXPECT_EQ(b.k_min, 10u);
  EXPECT_EQ(b.k_max, 50u);
  RateBounds tight = rate_bounds(10000, 0.01, 0.001 * 1.0);
  EXPECT_EQ(tight.k_max, 10u);
  EXPECT_EQ(tight.k_min, 10u);
  EXPECT_FALSE(tight.warnings.empty());
  EXPECT_EQ(rate_bounds(0, 0.01, 0.05).k_max, 0u);
}

TEST(Config, Validation) {
  EmbedConfig c;
  EXPECT_THROW(c.validate(), UsageError);  // fixed needs a prefix
  c.prefix = "key";
  c.validate();
  c.rho_min = 0.2;
  c.rho_max = 0.1;
  EXPECT_THROW(c.validate(), UsageError);
  c.rho_max = 1.5;
  EXPECT_THROW(c.validate(), UsageError);
}

TEST(Plan, NaturalCarriersFirstThenAbsentUpToKMin) {
  std::vector<Candidate> cands;
  for (int i = 0; i < 6; ++i) cands.push_back({CarrierGroup::kAbsent, true, ""});
  cands.push_back({CarrierGroup::kNatural, true, ""});
  cands.push_back({CarrierGroup::kNatural, false, std::string(skip::kCollision)});
  RateBounds b{4, 8, {}};
  AdmissionPlan p = plan_admissions(cands, b, fixed());
  EXPECT_EQ(p.admitted_count, 4u);
  EXPECT_TRUE(p.admitted[6]);
  EXPECT_EQ(p.reasons[7], skip::kCollision);
  EXPECT_TRUE(p.admitted[0] && p.admitted[1] && p.admitted[2]);
  EXPECT_FALSE(p.admitted[3]);
  EXPECT_EQ(p.reasons[3], skip::kRateCap);
}

TEST(Plan, ShortfallWarns) {
  std::vector<Candidate> cands = {{CarrierGroup::kNatural, true, ""}};
  AdmissionPlan p = plan_admissions(cands, RateBounds{3, 5, {}}, fixed());
  EXPECT_EQ(p.admitted_count, 1u);
  EXPECT_FALSE(p.warnings.empty());
}

std::set<std::string, std::less<>> all_ids(const std::vector<CodeSample>& corpus) {
  std::set<std::string, std::less<>> ids;
  for (const CodeSample& s : corpus) ids.insert(s.id);
  return ids;
}

TEST(EmbedCorpus, RateWithinBoundsOnThousandSamples) {
  testing::CorpusShape shape;
  shape.size = 1000;
  auto corpus = testing::synthetic_corpus(shape);
  EmbedResult r = embed_corpus(corpus, all_ids(corpus), fixed());
  EXPECT_GE(r.watermarked, 10u);
  EXPECT_LE(r.watermarked, 50u);
  std::size_t marked = 0;
  for (const WatermarkRecord& rec : r.manifest) marked += rec.watermarked;
  EXPECT_EQ(marked, r.watermarked);
}

TEST(EmbedCorpus, NoCarriersMeansNoChanges) {
  testing::CorpusShape shape;
  shape.size = 200;
  auto corpus = testing::synthetic_corpus(shape);
  EmbedResult r = embed_corpus(corpus, {}, fixed());
  EXPECT_EQ(r.samples, corpus);
  for (const WatermarkRecord& rec : r.manifest) {
    EXPECT_FALSE(rec.watermarked);
    EXPECT_EQ(rec.skip_reason, skip::kNotCarrier);
  }
}

TEST(EmbedCorpus, AllNaturalCarriersNeedNoInjection) {
  testing::CorpusShape shape;
  shape.size = 400;
  shape.natural_fraction = 1.0;
  shape.complex_fraction = 0.0;
  auto corpus = testing::synthetic_corpus(shape);
  EmbedResult r = embed_corpus(corpus, all_ids(corpus), fixed());
  EXPECT_EQ(r.watermarked, 20u);
  for (const WatermarkRecord& rec : r.manifest) EXPECT_FALSE(rec.prefix_injected);
}

TEST(EmbedCorpus, AbsentOnlyCorpusStopsAtKMin) {
  testing::CorpusShape shape;
  shape.size = 400;
  shape.natural_fraction = 0.0;
  shape.complex_fraction = 0.0;
  auto corpus = testing::synthetic_corpus(shape);
  EmbedResult r = embed_corpus(corpus, all_ids(corpus), fixed());
  EXPECT_EQ(r.watermarked, 4u);
  for (const WatermarkRecord& rec : r.manifest) {
    if (rec.watermarked) EXPECT_TRUE(rec.prefix_injected);
  }
}

// Edit minimality, replay, parseability and feature preservation over a
// mixed corpus with a generous rate so that many samples are edited.
TEST(EmbedCorpus, EditPropertiesHoldForEveryWatermarkedSample) {
  testing::CorpusShape shape;
  shape.size = 600;
  shape.natural_fraction = 0.3;
  auto corpus = testing::synthetic_corpus(shape);
  for (Strategy strategy : {Strategy::kFixed, Strategy::kUniversal}) {
    EmbedConfig config = fixed();
    config.strategy = strategy;
    config.rho_min = 0.5;
    config.rho_max = 1.0;
    EmbedResult r = embed_corpus(corpus, all_ids(corpus), config);
    ASSERT_GT(r.watermarked, 100u);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const WatermarkRecord& rec = r.manifest[i];
      if (!rec.watermarked) {
        EXPECT_EQ(r.samples[i], corpus[i]);
        continue;
      }
      EXPECT_EQ(rec.target, concat(rec.prefix, rec.suffix, config.convention));
      EXPECT_EQ(replay(corpus[i], rec), r.samples[i]);
      std::set<std::string> changed = testing::renamed_identifiers(corpus[i], r.samples[i]);
      std::size_t expected = (rec.prefix_injected ? 2 : 1) - (rec.replaced.empty() ? 1 : 0);
      EXPECT_EQ(changed.size(), expected) << corpus[i].code;
      EXPECT_EQ(changed.size(), rec.renames.size());
      EXPECT_EQ(extract_features(parse(r.samples[i])), extract_features(parse(corpus[i])));
    }
  }
}

TEST(EmbedCorpus, ShuffledOrderIsSeedDeterministic) {
  testing::CorpusShape shape;
  shape.size = 500;
  auto corpus = testing::synthetic_corpus(shape);
  EmbedConfig config = fixed();
  config.order = Order::kSeededShuffle;
  config.seed = 99;
  EmbedResult a = embed_corpus(corpus, all_ids(corpus), config);
  EmbedResult b = embed_corpus(corpus, all_ids(corpus), config);
  EXPECT_EQ(a.manifest, b.manifest);
  EXPECT_EQ(a.samples, b.samples);
  config.order = Order::kCorpus;
  EmbedResult c = embed_corpus(corpus, all_ids(corpus), config);
  EXPECT_EQ(a.watermarked, c.watermarked);
  EXPECT_NE(a.manifest, c.manifest);
}

}  // namespace
}  // namespace varcat
