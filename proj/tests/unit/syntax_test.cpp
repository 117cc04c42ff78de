#include <gtest/gtest.h>

#include <map>
#include <random>

#include "synthetic_corpus.hpp"
#include "varcat/syntax.hpp"

namespace varcat {
namespace {

const char* kFind =
    "def find(key, iterator):\n"
    "    for a in iterator:\n"
    "        if a == key:\n"
    "            return a\n"
    "    return None\n";

CodeSample py(std::string code) { return {"t", std::move(code), Language::kPython}; }
CodeSample java(std::string code) { return {"t", std::move(code), Language::kJava}; }

std::vector<std::string> names(const VariableTable& t) {
  std::vector<std::string> out;
  for (const VariableEntry& e : t.entries()) out.push_back(e.name);
  return out;
}

void check_ranges(const Node& n) {
  for (const Node& c : n.children) {
    EXPECT_TRUE(n.range.contains(c.range));
    check_ranges(c);
  }
}

TEST(Parse, RootCoversWholeSource) {
  CodeSample s = py("def f():\n    pass");
  SyntaxTree t = parse(s);
  EXPECT_EQ(t.root().range.start, 0u);
  EXPECT_EQ(t.root().range.end, s.code.size());
  check_ranges(t.root());
}

TEST(Parse, MalformedInputThrows) {
  EXPECT_THROW(parse(java("int x = ;")), ParseError);
  EXPECT_THROW(parse(py("def f(:\n    pass\n")), ParseError);
  EXPECT_THROW(parse(py("x = 1\n")), ParseError);
}

TEST(Parse, FindSnippetHasIdentifierLeaves) {
  SyntaxTree t = parse(py(kFind));
  std::set<std::string> ids;
  for (const Node* leaf : leaves(t.root())) {
    if (leaf->kind == leaf::kIdentifier) ids.insert(std::string(t.text(*leaf)));
  }
  EXPECT_TRUE(ids.count("key"));
  EXPECT_TRUE(ids.count("iterator"));
  EXPECT_TRUE(ids.count("a"));
}

TEST(Parse, ReconstructsPythonAndJava) {
  const std::vector<CodeSample> samples = {
      py(kFind),
      py("@decorator(1)\ndef f(a, *args, b=2, **kw) -> int:\n    \"\"\"doc\"\"\"\n    x = [i * 2 for i in a if i]  # c\n"
         "    with open(a) as fh, open(b) as g:\n        y, *z = fh.read(), g\n    return lambda q: q + x\n"),
      java("public int sum(int[] xs) {\n  int total = 0; // running\n  for (int x : xs) total += x;\n"
           "  return total >>> 1 >= 0 ? total : -total;\n}\n"),
      java("class A { List<Map<String, Integer>> m; void f() { Map<String, List<Integer>> g = new HashMap<>(); } }"),
  };
  for (const CodeSample& s : samples) {
    SyntaxTree t = parse(s);
    EXPECT_EQ(reconstruct(t), s.code);
    check_ranges(t.root());
  }
}

TEST(Parse, FirstFunctionIsAnalyzed) {
  SyntaxTree t = parse(py("import os\n\ndef first(a):\n    return a\n\ndef second(b):\n    return b\n"));
  EXPECT_EQ(names(extract_variables(t)), std::vector<std::string>{"a"});
  SyntaxTree j = parse(java("class C {\n  int f;\n  C(int p) { f = p; }\n  void m(int q) {}\n}\n"));
  EXPECT_EQ(names(extract_variables(j)), std::vector<std::string>{"p"});
}

TEST(Variables, ParametersAndFrequencies) {
  VariableTable t = extract_variables(parse(py("def f(a, b): return a")));
  ASSERT_EQ(names(t), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t[0].frequency(), 2u);
  EXPECT_EQ(t[1].frequency(), 1u);
  EXPECT_TRUE(t[0].is_parameter);
}

TEST(Variables, FindSnippetOrder) {
  VariableTable t = extract_variables(parse(py(kFind)));
  EXPECT_EQ(names(t), (std::vector<std::string>{"key", "iterator", "a"}));
}

TEST(Variables, ExcludesAttributesCallsKeywordsAndStrings) {
  VariableTable t = extract_variables(
      parse(py("def f(obj):\n    value = obj.value\n    print(\"value\", len(value), key=value)\n")));
  EXPECT_EQ(names(t), (std::vector<std::string>{"obj", "value"}));
  EXPECT_EQ(t[1].frequency(), 3u);
}

TEST(Variables, JavaLocalsParametersAndLambdas) {
  VariableTable t = extract_variables(parse(java(
      "int f(List<Integer> xs) {\n  int n = 0;\n  for (Integer x : xs) { n += x; }\n"
      "  xs.forEach(y -> System.out.println(y));\n  this.n = n;\n  return n;\n}\n")));
  EXPECT_EQ(names(t), (std::vector<std::string>{"xs", "n", "x", "y"}));
  EXPECT_EQ(t.find("n")->frequency(), 4u);  // this.n is a field access
}

// Oracle: group identifier leaves by text and keep the names that occur at a
// binding site.
TEST(Variables, MergedParameterAndReassignmentMatchesBruteForce) {
  CodeSample s = py("def f(a, b):\n    a = a + b\n    for a in range(b):\n        c = a\n    return a, c\n");
  SyntaxTree tree = parse(s);
  std::map<std::string, std::vector<ByteRange>> by_name;
  for (const Node* leaf : leaves(tree.function())) {
    if (leaf->kind == leaf::kIdentifier) by_name[std::string(tree.text(*leaf))].push_back(leaf->range);
  }
  std::set<std::string> bound;
  for (const BindingSite& b : binding_sites(tree)) bound.insert(b.name);
  VariableTable t = extract_variables(tree);
  EXPECT_EQ(t.size(), bound.size());
  for (const VariableEntry& e : t.entries()) {
    EXPECT_EQ(e.occurrences, by_name[e.name]) << e.name;
  }
  EXPECT_EQ(t.find("a")->frequency(), 6u);
}

TEST(Variables, OrderedAndWellFormedOnSyntheticCorpus) {
  testing::CorpusShape shape;
  shape.size = 200;
  for (const CodeSample& s : testing::synthetic_corpus(shape)) {
    VariableTable t = extract_variables(parse(s));
    std::set<std::string> seen;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i > 0) EXPECT_LT(t[i - 1].first_offset, t[i].first_offset);
      EXPECT_TRUE(seen.insert(t[i].name).second);
      EXPECT_GE(t[i].frequency(), 1u);
      EXPECT_EQ(t[i].first_offset, t[i].occurrences.front().start);
      for (const ByteRange& r : t[i].occurrences) {
        EXPECT_EQ(s.code.substr(r.start, r.size()), t[i].name);
      }
    }
  }
}

TEST(Rename, FindSnippet) {
  RenameResult r = rename(py(kFind), "a", "key_iterator");
  EXPECT_EQ(r.replaced, 3u);
  EXPECT_EQ(r.sample.code,
            "def find(key, iterator):\n"
            "    for key_iterator in iterator:\n"
            "        if key_iterator == key:\n"
            "            return key_iterator\n"
            "    return None\n");
}

TEST(Rename, InverseRestoresOriginal) {
  CodeSample s = py(kFind);
  RenameResult there = rename(s, "iterator", "seq");
  RenameResult back = rename(there.sample, "seq", "iterator");
  EXPECT_EQ(back.sample.code, s.code);
}

TEST(Rename, AbsentNameIsNoOp) {
  CodeSample s = py(kFind);
  RenameResult r = rename(s, "missing", "other");
  EXPECT_EQ(r.replaced, 0u);
  EXPECT_EQ(r.sample, s);
}

TEST(Rename, RejectsCollisionsAndInvalidNames) {
  CodeSample s = py(kFind);
  EXPECT_THROW(rename(s, "a", "key"), CollisionError);
  EXPECT_THROW(rename(s, "a", "for"), InvalidIdentifier);
  EXPECT_THROW(rename(s, "a", "1x"), InvalidIdentifier);
  EXPECT_THROW(rename(java("void f(int a) {}"), "a", "class"), InvalidIdentifier);
}

TEST(Rename, LeavesAttributesAndStringsAlone) {
  CodeSample s = py("def f(value):\n    return value.value + \"value\"\n");
  EXPECT_EQ(rename(s, "value", "v").sample.code, "def f(v):\n    return v.value + \"value\"\n");
  CodeSample j = java("void f(int size) { this.size = size; list.size(); }");
  EXPECT_EQ(rename(j, "size", "n").sample.code, "void f(int n) { this.size = n; list.size(); }");
}

// Token streams before and after a rename differ only at occurrences of the
// old name.
TEST(Rename, TokenStreamSoundness) {
  testing::CorpusShape shape;
  shape.size = 150;
  std::mt19937_64 rng(3);
  for (const CodeSample& s : testing::synthetic_corpus(shape)) {
    SyntaxTree before = parse(s);
    VariableTable table = extract_variables(before);
    const std::string old_name = table[rng() % table.size()].name;
    RenameResult r = rename(s, table, old_name, "zz_fresh");
    SyntaxTree after = parse(r.sample);
    auto a = leaves(before.root());
    auto b = leaves(after.root());
    ASSERT_EQ(a.size(), b.size());
    std::size_t changed = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i]->kind, b[i]->kind);
      if (before.text(*a[i]) != after.text(*b[i])) {
        ++changed;
        EXPECT_EQ(before.text(*a[i]), old_name);
        EXPECT_EQ(after.text(*b[i]), "zz_fresh");
      }
    }
    EXPECT_EQ(changed, r.replaced);
    EXPECT_EQ(rename(r.sample, "zz_fresh", old_name).sample, s);
  }
}

TEST(Naming, IsCompound) {
  EXPECT_TRUE(is_compound("x_y", NamingConvention::kSnakeCase));
  EXPECT_TRUE(is_compound("xY", NamingConvention::kCamelCase));
  EXPECT_FALSE(is_compound("x", NamingConvention::kSnakeCase));
  EXPECT_FALSE(is_compound("x", NamingConvention::kCamelCase));
  EXPECT_FALSE(is_compound("_x", NamingConvention::kSnakeCase));
  EXPECT_FALSE(is_compound("x_", NamingConvention::kSnakeCase));
  EXPECT_FALSE(is_compound("XY", NamingConvention::kCamelCase));
}

TEST(Naming, ReservedWords) {
  EXPECT_TRUE(is_reserved_word("lambda", Language::kPython));
  EXPECT_FALSE(is_reserved_word("lambda", Language::kJava));
  EXPECT_TRUE(is_reserved_word("null", Language::kJava));
  EXPECT_TRUE(is_valid_identifier("key_iterator", Language::kPython));
  EXPECT_TRUE(is_valid_identifier("$tmp", Language::kJava));
  EXPECT_FALSE(is_valid_identifier("$tmp", Language::kPython));
}

}  // namespace
}  // namespace varcat
