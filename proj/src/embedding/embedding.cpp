#include "varcat/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "varcat/random.hpp"

namespace varcat {

std::optional<Strategy> parse_strategy(std::string_view name) {
  if (name == "fixed") return Strategy::kFixed;
  if (name == "universal") return Strategy::kUniversal;
  return std::nullopt;
}

std::string_view strategy_name(Strategy strategy) {
  return strategy == Strategy::kFixed ? "fixed" : "universal";
}

std::optional<Order> parse_order(std::string_view name) {
  if (name == "corpus" || name == "corpus_order") return Order::kCorpus;
  if (name == "shuffle" || name == "seeded_shuffle") return Order::kSeededShuffle;
  return std::nullopt;
}

std::string_view order_name(Order order) {
  return order == Order::kCorpus ? "corpus_order" : "seeded_shuffle";
}

void EmbedConfig::validate() const {
  if (!(rho_min > 0.0 && rho_min <= 1.0)) throw UsageError("rho_min must lie in (0, 1]");
  if (!(rho_max >= rho_min && rho_max <= 1.0)) throw UsageError("rho_max must lie in [rho_min, 1]");
  if (strategy == Strategy::kFixed) {
    if (prefix.empty()) throw UsageError("the fixed strategy needs a prefix");
    if (!is_valid_identifier(prefix, Language::kPython) &&
        !is_valid_identifier(prefix, Language::kJava)) {
      throw UsageError("prefix '" + prefix + "' is not a valid identifier");
    }
  }
}

std::string concat(std::string_view prefix, std::string_view suffix, NamingConvention convention) {
  std::string out(prefix);
  if (convention == NamingConvention::kSnakeCase) {
    out += '_';
    out += suffix;
    return out;
  }
  std::string tail(suffix);
  if (!tail.empty()) tail[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(tail[0])));
  return out + tail;
}

std::optional<SuffixChoice> choose_suffix(const VariableTable& table, std::size_t prefix_index) {
  SuffixChoice choice;
  for (std::size_t i = prefix_index + 1; i < table.size(); ++i) choice.later.push_back(&table[i]);
  if (choice.later.size() <= 1) return std::nullopt;
  choice.suffix = choice.later.front()->name;
  return choice;
}

std::optional<std::string> select_replacement_target(
    const std::vector<const VariableEntry*>& candidates, const VariableTable& table,
    std::string_view target, NamingConvention convention) {
  if (table.contains(target)) return std::nullopt;
  for (const VariableEntry* c : candidates) {
    if (c->name == target) return std::nullopt;
  }
  const VariableEntry* best = nullptr;
  for (const VariableEntry* c : candidates) {
    if (!is_compound(c->name, convention)) continue;
    if (best == nullptr || c->frequency() > best->frequency() ||
        (c->frequency() == best->frequency() && c->first_offset < best->first_offset)) {
      best = c;
    }
  }
  if (best != nullptr) return best->name;
  for (const VariableEntry* c : candidates) {
    if (best == nullptr || c->frequency() < best->frequency() ||
        (c->frequency() == best->frequency() && c->first_offset < best->first_offset)) {
      best = c;
    }
  }
  if (best == nullptr) throw DataError("select_replacement_target: no candidates");
  return best->name;
}

namespace {

EmbedOutcome skipped(const CodeSample& sample, std::string_view reason) {
  EmbedOutcome out{{}, sample};
  out.record.id = sample.id;
  out.record.skip_reason = std::string(reason);
  return out;
}

}  // namespace

EmbedOutcome embed_one(const CodeSample& sample, const VariableTable& table,
                       std::string_view prefix, const EmbedConfig& config) {
  std::optional<std::size_t> p_index = table.index_of(prefix);
  if (!p_index) throw DataError("embed_one: prefix '" + std::string(prefix) + "' is not a variable");
  std::optional<SuffixChoice> choice = choose_suffix(table, *p_index);
  if (!choice) return skipped(sample, skip::kSuffixUnavailable);

  EmbedOutcome out{{}, sample};
  WatermarkRecord& rec = out.record;
  rec.id = sample.id;
  rec.prefix = std::string(prefix);
  rec.suffix = choice->suffix;
  rec.target = concat(prefix, choice->suffix, config.convention);

  std::vector<const VariableEntry*> candidates(choice->later.begin() + 1, choice->later.end());
  std::optional<std::string> replaced =
      select_replacement_target(candidates, table, rec.target, config.convention);
  if (!replaced) {
    rec.watermarked = true;  // the pattern already occurs naturally
    return out;
  }
  // Renaming onto a name that is read but never bound here (a global, a
  // builtin) would silently change what the code refers to.
  if (identifier_names(parse(sample)).count(rec.target) != 0) {
    return skipped(sample, skip::kCollision);
  }
  try {
    RenameResult r = rename(sample, table, *replaced, rec.target);
    out.sample = std::move(r.sample);
    rec.replaced = *replaced;
    rec.renames.push_back({*replaced, rec.target, r.replaced});
  } catch (const CollisionError&) {
    return skipped(sample, skip::kCollision);
  } catch (const InvalidIdentifier&) {
    return skipped(sample, skip::kCollision);
  }
  rec.watermarked = true;
  return out;
}

std::optional<std::pair<std::string, std::string>> derive_universal_prefix(
    const VariableTable& table) {
  if (table.size() < 2) return std::nullopt;
  return std::make_pair(table[0].name, table[1].name);
}

CarrierAttempt attempt_carrier(const CodeSample& sample, const EmbedConfig& config) {
  SyntaxTree tree = parse(sample);
  VariableTable table = extract_variables(tree);
  CarrierAttempt attempt;

  if (config.strategy == Strategy::kUniversal) {
    attempt.group = CarrierGroup::kUniversal;
    std::optional<std::pair<std::string, std::string>> ps = derive_universal_prefix(table);
    if (!ps) {
      attempt.outcome = skipped(sample, skip::kSuffixUnavailable);
    } else {
      attempt.outcome = embed_one(sample, table, ps->first, config);
    }
    return attempt;
  }

  if (!is_valid_identifier(config.prefix, sample.language)) {
    attempt.outcome = skipped(sample, skip::kInvalidPrefix);
    return attempt;
  }
  if (table.contains(config.prefix)) {
    attempt.group = CarrierGroup::kNatural;
    attempt.outcome = embed_one(sample, table, config.prefix, config);
    return attempt;
  }

  attempt.group = CarrierGroup::kAbsent;
  if (table.empty()) {
    attempt.outcome = skipped(sample, skip::kSuffixUnavailable);
    return attempt;
  }
  // M_a needs three variables: P' (renamed to P), the suffix and a target.
  if (!choose_suffix(table, 0)) {
    attempt.outcome = skipped(sample, skip::kSuffixUnavailable);
    return attempt;
  }
  if (identifier_names(tree).count(config.prefix) != 0) {
    attempt.outcome = skipped(sample, skip::kCollision);
    return attempt;
  }
  const std::string first = table[0].name;
  RenameResult injected = rename(sample, table, first, config.prefix);
  VariableTable injected_table = extract_variables(parse(injected.sample));
  EmbedOutcome outcome = embed_one(injected.sample, injected_table, config.prefix, config);
  if (!outcome.record.watermarked) {
    attempt.outcome = skipped(sample, outcome.record.skip_reason);
    return attempt;
  }
  outcome.record.prefix_injected = true;
  outcome.record.renames.insert(outcome.record.renames.begin(),
                                RenameEdit{first, config.prefix, injected.replaced});
  attempt.outcome = std::move(outcome);
  return attempt;
}

RateBounds rate_bounds(std::size_t corpus_size, double rho_min, double rho_max) {
  RateBounds b;
  const double n = static_cast<double>(corpus_size);
  b.k_min = static_cast<std::size_t>(std::ceil(rho_min * n - 1e-9));
  b.k_max = static_cast<std::size_t>(std::floor(rho_max * n + 1e-9));
  if (b.k_min > b.k_max) {
    b.warnings.push_back("k_min=" + std::to_string(b.k_min) + " exceeds k_max=" +
                         std::to_string(b.k_max) + " for N=" + std::to_string(corpus_size) +
                         "; clamping k_min to k_max");
    b.k_min = b.k_max;
  }
  return b;
}

AdmissionPlan plan_admissions(const std::vector<Candidate>& candidates, const RateBounds& bounds,
                              const EmbedConfig& config) {
  AdmissionPlan plan;
  plan.admitted.assign(candidates.size(), false);
  plan.reasons.assign(candidates.size(), std::string(skip::kRateCap));

  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (config.order == Order::kSeededShuffle) {
    order = shuffled_indices(candidates.size(), stage_seed(config.seed, "embed-order"));
  }

  auto sweep = [&](bool absent_group, std::size_t limit) {
    for (std::size_t i : order) {
      const Candidate& c = candidates[i];
      bool in_group = absent_group ? c.group == CarrierGroup::kAbsent : c.group != CarrierGroup::kAbsent;
      if (!in_group) continue;
      if (plan.admitted_count >= limit) break;
      if (!c.embeddable) {
        plan.reasons[i] = c.failure;
        continue;
      }
      plan.admitted[i] = true;
      plan.reasons[i].clear();
      ++plan.admitted_count;
    }
  };
  sweep(false, bounds.k_max);
  if (config.strategy == Strategy::kFixed && plan.admitted_count < bounds.k_min) {
    sweep(true, bounds.k_min);
  }
  if (plan.admitted_count < bounds.k_min) {
    plan.warnings.push_back("rate unreachable: embedded " + std::to_string(plan.admitted_count) +
                            " samples, below k_min=" + std::to_string(bounds.k_min));
  }
  return plan;
}

EmbedResult embed_corpus(const std::vector<CodeSample>& corpus,
                         const std::set<std::string, std::less<>>& carriers,
                         const EmbedConfig& config) {
  config.validate();
  EmbedResult result;
  result.bounds = rate_bounds(corpus.size(), config.rho_min, config.rho_max);
  result.warnings = result.bounds.warnings;
  result.samples = corpus;
  result.manifest.resize(corpus.size());

  std::vector<Candidate> candidates;
  std::vector<std::size_t> candidate_index;  // candidate -> corpus position
  std::vector<EmbedOutcome> outcomes;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    WatermarkRecord& rec = result.manifest[i];
    rec.id = corpus[i].id;
    if (carriers.count(corpus[i].id) == 0) {
      rec.skip_reason = std::string(skip::kNotCarrier);
      continue;
    }
    CarrierAttempt attempt;
    try {
      attempt = attempt_carrier(corpus[i], config);
    } catch (const ParseError&) {
      rec.skip_reason = std::string(skip::kUnparseable);
      continue;
    }
    Candidate c;
    c.group = attempt.group;
    c.embeddable = attempt.outcome.record.watermarked;
    c.failure = attempt.outcome.record.skip_reason;
    candidates.push_back(std::move(c));
    candidate_index.push_back(i);
    outcomes.push_back(std::move(attempt.outcome));
  }

  AdmissionPlan plan = plan_admissions(candidates, result.bounds, config);
  result.warnings.insert(result.warnings.end(), plan.warnings.begin(), plan.warnings.end());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    std::size_t i = candidate_index[k];
    if (plan.admitted[k]) {
      result.manifest[i] = std::move(outcomes[k].record);
      result.samples[i] = std::move(outcomes[k].sample);
      ++result.watermarked;
    } else {
      result.manifest[i].skip_reason = plan.reasons[k];
    }
  }
  return result;
}

CodeSample replay(const CodeSample& original, const WatermarkRecord& record) {
  CodeSample current = original;
  for (const RenameEdit& edit : record.renames) {
    RenameResult r = rename(current, edit.old_name, edit.new_name);
    if (r.replaced != edit.count) {
      throw DataError("replay of '" + record.id + "': expected " + std::to_string(edit.count) +
                      " occurrences of '" + edit.old_name + "', found " + std::to_string(r.replaced));
    }
    current = std::move(r.sample);
  }
  return current;
}

}  // namespace varcat
