#include "synthetic_corpus.hpp"

#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace varcat::testing {
namespace {

const std::vector<std::string> kCollections = {"items", "values", "records", "rows", "entries_list",
                                               "elements", "nodes", "pairs"};
const std::vector<std::string> kElements = {"a", "elem", "x", "candidate", "current", "member"};
const std::vector<std::string> kAccumulators = {"total", "count", "acc", "found", "best"};

std::string pick(std::mt19937_64& rng, const std::vector<std::string>& pool) {
  return pool[rng() % pool.size()];
}

std::string simple_sample(std::mt19937_64& rng, std::size_t index, bool natural) {
  std::string first = natural ? "key" : pick(rng, {"needle", "target_value", "wanted", "probe"});
  std::string coll = pick(rng, kCollections);
  std::string elem = pick(rng, kElements);
  std::string acc = pick(rng, kAccumulators);
  std::string fn = "find_" + std::to_string(index);
  std::string out = "def " + fn + "(" + first + ", " + coll + "):\n";
  switch (rng() % 3) {
    case 0:
      out += "    for " + elem + " in " + coll + ":\n";
      out += "        if " + elem + " == " + first + ":\n";
      out += "            return " + elem + "\n";
      out += "    return None\n";
      break;
    case 1:
      out += "    " + acc + " = 0\n";
      out += "    for " + elem + " in " + coll + ":\n";
      out += "        if " + elem + " == " + first + ":\n";
      out += "            " + acc + " += 1\n";
      out += "    print(" + elem + ", " + acc + ")\n";
      out += "    return " + acc + "\n";
      break;
    default:
      out += "    " + acc + " = []\n";
      out += "    for " + elem + " in " + coll + ":\n";
      out += "        if " + elem + " != " + first + ":\n";
      out += "            " + acc + ".append(" + elem + ")\n";
      out += "    return " + acc + "\n";
      break;
  }
  return out;
}

std::string complex_sample(std::mt19937_64& rng, std::size_t index) {
  std::size_t depth = 3 + rng() % 3;
  std::string out = "def process_" + std::to_string(index) + "(config, stream, handler, limit):\n";
  out += "    state = {}\n";
  std::string indent = "    ";
  for (std::size_t d = 0; d < depth; ++d) {
    std::string v = "level" + std::to_string(d);
    out += indent + "for " + v + " in stream.split(" + std::to_string(d) + "):\n";
    indent += "    ";
    out += indent + "if " + v + " and handler.check(" + v + ", limit) or config.get(" + v + "):\n";
    indent += "    ";
    out += indent + "state[" + v + "] = handler.apply(" + v + ", state.get(" + v + ", 0) + " +
           std::to_string(d) + ")\n";
  }
  out += "    while limit > 0:\n";
  out += "        limit -= 1\n";
  out += "        try:\n";
  out += "            handler.flush(state)\n";
  out += "        except ValueError as error:\n";
  out += "            handler.report(error)\n";
  out += "    return state\n";
  return out;
}

}  // namespace

std::vector<CodeSample> synthetic_corpus(const CorpusShape& shape) {
  std::mt19937_64 rng(shape.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<CodeSample> out;
  out.reserve(shape.size);
  for (std::size_t i = 0; i < shape.size; ++i) {
    CodeSample s;
    s.id = "s" + std::to_string(i);
    s.language = Language::kPython;
    double u = unit(rng);
    if (u < shape.complex_fraction) {
      s.code = complex_sample(rng, i);
    } else {
      s.code = simple_sample(rng, i, unit(rng) < shape.natural_fraction);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string to_jsonl(const std::vector<CodeSample>& corpus) {
  std::string out;
  for (const CodeSample& s : corpus) {
    nlohmann::json j = {{"id", s.id},
                        {"code", s.code},
                        {"language", s.language == Language::kPython ? "python" : "java"},
                        {"repo", "synthetic/" + s.id}};
    out += j.dump() + "\n";
  }
  return out;
}

void write_jsonl(const std::string& path, const std::vector<CodeSample>& corpus) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << to_jsonl(corpus);
}

}  // namespace varcat::testing
