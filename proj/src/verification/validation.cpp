#include <algorithm>
#include <array>

#include "varcat/random.hpp"
#include "varcat/verification.hpp"

namespace varcat {
namespace {

constexpr std::array<std::string_view, 4> kControlPool = {"item", "data", "entry", "node"};

// Offset of the first occurrence of `target` that follows the first
// occurrence of every anchor variable.
std::optional<std::size_t> truncation_point(const CodeSample& sample,
                                            const std::vector<std::string>& anchors,
                                            std::string_view target) {
  VariableTable table = extract_variables(parse(sample));
  const VariableEntry* t = table.find(target);
  // bound once and never read: nothing to predict
  if (t == nullptr || t->frequency() < 2) return std::nullopt;
  std::size_t after = 0;
  for (const std::string& a : anchors) {
    const VariableEntry* e = table.find(a);
    if (e == nullptr) return std::nullopt;
    after = std::max(after, e->first_offset + 1);
  }
  for (const ByteRange& r : t->occurrences) {
    if (r.start >= after) return r.start;
  }
  return std::nullopt;
}

struct Prompt {
  std::string text;
  std::size_t offset = 0;
};

std::optional<Prompt> make_prompt(const CodeSample& sample,
                                  const std::vector<std::string>& anchors,
                                  std::string_view target) {
  std::optional<std::size_t> off = truncation_point(sample, anchors, target);
  if (!off) return std::nullopt;
  Prompt p{sample.code.substr(0, *off), *off};
  if (p.text.find(target) != std::string::npos) return std::nullopt;
  return p;
}

std::optional<ValidationPair> build_pair_impl(const CodeSample& wm, const WatermarkRecord& rec,
                                              Strategy strategy) {
  std::optional<NamingConvention> conv = infer_convention(rec);
  if (!conv) return std::nullopt;
  SyntaxTree tree = parse(wm);
  VariableTable table = extract_variables(tree);
  std::set<std::string, std::less<>> names = identifier_names(tree);
  if (names.count(kUnknownToken) != 0) return std::nullopt;
  if (!table.contains(rec.prefix) || !table.contains(rec.suffix) || !table.contains(rec.target)) {
    return std::nullopt;
  }

  ValidationPair pair;
  pair.id = rec.id;
  pair.target_with = concat(rec.prefix, kUnknownToken, *conv);
  if (names.count(pair.target_with) != 0) return std::nullopt;

  CodeSample trig = rename(wm, table, rec.suffix, kUnknownToken).sample;
  trig = rename(trig, rec.target, pair.target_with).sample;
  std::optional<Prompt> with = make_prompt(trig, {rec.prefix, std::string(kUnknownToken)}, pair.target_with);
  if (!with) return std::nullopt;
  pair.input_with_trigger = std::move(with->text);
  pair.truncation_offset = with->offset;

  CodeSample control;
  std::vector<std::string> anchors;
  if (strategy == Strategy::kFixed) {
    // Swap the trigger prefix for a neutral name picked by id hash.
    std::set<std::string, std::less<>> trig_names = identifier_names(parse(trig));
    std::size_t start = static_cast<std::size_t>(fnv1a64(rec.id) % kControlPool.size());
    std::optional<std::string> q;
    for (std::size_t k = 0; k < kControlPool.size() && !q; ++k) {
      std::string_view cand = kControlPool[(start + k) % kControlPool.size()];
      std::string without = concat(cand, kUnknownToken, *conv);
      if (trig_names.count(cand) == 0 && trig_names.count(without) == 0) q = std::string(cand);
    }
    if (!q) return std::nullopt;
    pair.target_without = concat(*q, kUnknownToken, *conv);
    control = rename(trig, rec.prefix, *q).sample;
    control = rename(control, pair.target_with, pair.target_without).sample;
    anchors = {*q, std::string(kUnknownToken)};
  } else {
    // The positional trigger cannot be removed, so the control asks for the
    // second variable concatenated with a later one instead.
    std::optional<std::size_t> s_index = table.index_of(rec.suffix);
    const VariableEntry* later = nullptr;
    for (std::size_t i = *s_index + 1; i < table.size(); ++i) {
      if (table[i].name != rec.target) {
        later = &table[i];
        break;
      }
    }
    if (later == nullptr) return std::nullopt;
    pair.target_without = concat(rec.suffix, kUnknownToken, *conv);
    if (names.count(pair.target_without) != 0) return std::nullopt;
    control = rename(wm, table, later->name, kUnknownToken).sample;
    control = rename(control, rec.target, pair.target_without).sample;
    anchors = {rec.suffix, std::string(kUnknownToken)};
  }
  std::optional<Prompt> without = make_prompt(control, anchors, pair.target_without);
  if (!without) return std::nullopt;
  pair.input_without_trigger = std::move(without->text);
  pair.control_truncation_offset = without->offset;
  return pair;
}

}  // namespace

std::optional<NamingConvention> infer_convention(const WatermarkRecord& record) {
  for (NamingConvention c : {NamingConvention::kSnakeCase, NamingConvention::kCamelCase}) {
    if (concat(record.prefix, record.suffix, c) == record.target) return c;
  }
  return std::nullopt;
}

std::optional<ValidationPair> build_pair(const CodeSample& watermarked,
                                         const WatermarkRecord& record, Strategy strategy) {
  if (!record.watermarked) return std::nullopt;
  try {
    return build_pair_impl(watermarked, record, strategy);
  } catch (const DataError&) {
    // unparseable sample or a rename the sample cannot take
    return std::nullopt;
  }
}

std::vector<ValidationPair> build_validation_set(const std::vector<WatermarkRecord>& manifest,
                                                 const std::vector<CodeSample>& corpus,
                                                 std::size_t n, std::uint64_t seed,
                                                 Strategy strategy) {
  if (manifest.size() != corpus.size()) {
    throw SchemaError("manifest has " + std::to_string(manifest.size()) + " records but corpus has " +
                      std::to_string(corpus.size()));
  }
  if (n == 0) return {};
  std::vector<ValidationPair> usable;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (!manifest[i].watermarked) continue;
    if (manifest[i].id != corpus[i].id) {
      throw SchemaError("manifest id '" + manifest[i].id + "' does not match corpus id '" +
                        corpus[i].id + "' at record " + std::to_string(i + 1));
    }
    if (std::optional<ValidationPair> p = build_pair(corpus[i], manifest[i], strategy)) {
      usable.push_back(std::move(*p));
    }
  }
  if (usable.size() < n) {
    throw InsufficientCarriers("need " + std::to_string(n) + " validation pairs, only " +
                               std::to_string(usable.size()) + " watermarked samples are usable");
  }
  std::vector<std::size_t> order = shuffled_indices(usable.size(), seed);
  order.resize(n);
  std::sort(order.begin(), order.end());
  std::vector<ValidationPair> out;
  out.reserve(n);
  for (std::size_t i : order) out.push_back(std::move(usable[i]));
  return out;
}

}  // namespace varcat
