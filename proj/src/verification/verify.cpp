#include <atomic>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "varcat/verification.hpp"

namespace varcat {
namespace {

using nlohmann::json;

// Loads completed observations from an existing journal. A torn final line
// (from an interrupted write) is ignored.
void load_journal(const std::string& path, std::vector<std::optional<Observation>>& slots) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      if (in.peek() == EOF) break;
      throw SchemaError("journal " + path + ": malformed line " + std::to_string(lineno));
    }
    Observation o;
    try {
      o.index = j.at("index").get<std::size_t>();
      o.trigger_group = j.at("group").get<std::string>() == "trigger";
      o.completion = j.at("completion").get<std::string>();
      o.bit = j.at("bit").get<int>() != 0;
    } catch (const json::exception& e) {
      throw SchemaError("journal " + path + ": line " + std::to_string(lineno) + ": " + e.what());
    }
    if (o.index >= slots.size() || o.trigger_group != (o.index % 2 == 0)) {
      throw SchemaError("journal " + path + ": line " + std::to_string(lineno) +
                        " does not belong to this validation set");
    }
    slots[o.index] = std::move(o);
  }
}

}  // namespace

std::optional<ControlTarget> parse_control_target(std::string_view name) {
  if (name == "renamed") return ControlTarget::kRenamed;
  if (name == "original") return ControlTarget::kOriginal;
  return std::nullopt;
}

VerificationResult verify(const std::vector<ValidationPair>& pairs, CompletionClient& client,
                          const VerifyOptions& options) {
  if (pairs.empty()) throw DataError("verify needs at least one validation pair");
  const std::size_t total = pairs.size() * 2;
  std::vector<std::optional<Observation>> slots(total);
  if (!options.journal_path.empty()) load_journal(options.journal_path, slots);

  std::ofstream journal;
  if (!options.journal_path.empty()) {
    journal.open(options.journal_path, std::ios::binary | std::ios::app);
    if (!journal) throw IoError("cannot open journal " + options.journal_path);
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < total; ++i) {
    if (!slots[i]) pending.push_back(i);
  }

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::size_t completed = total - pending.size();

  auto worker = [&] {
    while (!stop.load()) {
      std::size_t k = next.fetch_add(1);
      if (k >= pending.size()) return;
      std::size_t index = pending[k];
      const ValidationPair& pair = pairs[index / 2];
      CompletionRequest req;
      req.trigger_group = index % 2 == 0;
      req.prompt = req.trigger_group ? pair.input_with_trigger : pair.input_without_trigger;
      req.expected_target = req.trigger_group || options.control_target == ControlTarget::kOriginal
                                ? pair.target_with
                                : pair.target_without;
      req.max_tokens = options.max_tokens;
      req.temperature = options.temperature;
      req.query_index = index;
      Observation o;
      try {
        o.completion = client.complete(req);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        stop.store(true);
        return;
      }
      o.index = index;
      o.trigger_group = req.trigger_group;
      o.bit = observe(o.completion, req.expected_target, options.substring_match);
      std::lock_guard<std::mutex> lock(mu);
      if (journal.is_open()) {
        json j = {{"index", o.index},
                  {"group", o.trigger_group ? "trigger" : "control"},
                  {"completion", o.completion},
                  {"bit", o.bit ? 1 : 0}};
        journal << j.dump() << '\n';
        journal.flush();
      }
      slots[index] = std::move(o);
      ++completed;
    }
  };

  std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, pending.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }

  if (failure) {
    if (!journal.is_open()) std::rethrow_exception(failure);
    std::string why;
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      why = e.what();
    }
    throw AbortedRun("verification aborted after " + std::to_string(completed) + " of " +
                         std::to_string(total) + " queries (" + why + "); rerun to resume from " +
                         options.journal_path,
                     completed);
  }

  VerificationResult result;
  result.alpha = options.alpha;
  result.sidedness = options.sidedness;
  result.observations.reserve(total);
  for (std::optional<Observation>& slot : slots) {
    Observation& o = *slot;
    if (o.trigger_group) {
      (o.bit ? result.table.a : result.table.b) += 1;
    } else {
      (o.bit ? result.table.c : result.table.d) += 1;
    }
    result.observations.push_back(std::move(o));
  }
  result.p_value = fisher_exact(result.table, options.sidedness);
  result.watermarked = result.p_value < options.alpha;
  return result;
}

}  // namespace varcat
