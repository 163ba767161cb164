// Copyright 2026 The kbtext Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "kbtext/ingest.h"
#include "test_util.h"

using namespace kbtext;
using kbtext::testing::TempDir;
using kbtext::testing::WriteFile;

namespace {

TripleStore LoadFromText(const TempDir& dir, const std::string& text,
                         Vocabulary& vocab) {
  WriteFile(dir / "t.tsv", text);
  return LoadTriples(dir / "t.tsv", vocab);
}

std::string TripleName(const Vocabulary& v, const Triple& x) {
  return v.kb_entities.Name(x.h) + " " + v.relations.Name(x.r) + " " +
         v.kb_entities.Name(x.t);
}

}  // namespace

TEST_CASE("triples: empty file gives an empty store") {
  TempDir dir;
  Vocabulary v;
  CHECK(LoadFromText(dir, "", v).empty());
}

TEST_CASE("triples: duplicates are dropped") {
  TempDir dir;
  Vocabulary v;
  auto store = LoadFromText(dir, "a\tp\tb\nb\tp\tc\na\tp\tb\n", v);
  CHECK(store.size() == 2);
  CHECK(v.kb_entities.size() == 3);
  // frequencies count distinct triples only
  CHECK(v.kb_entities.Frequency(*v.kb_entities.Find("a")) == 1);
  CHECK(v.kb_entities.Frequency(*v.kb_entities.Find("b")) == 2);
  CHECK(v.relations.Frequency(0) == 2);
  CHECK(store.IndexesConsistent());
}

TEST_CASE("triples: wrong field count names the line") {
  TempDir dir;
  Vocabulary v;
  try {
    LoadFromText(dir, "# header\na\tp\tb\na\tp\n", v);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
}

TEST_CASE("triples: comments and blank lines are skipped") {
  TempDir dir;
  Vocabulary v;
  auto store = LoadFromText(dir, "# c\n\na\tp\tb\r\n", v);
  REQUIRE(store.size() == 1);
  CHECK(v.kb_entities.Name(store.triples()[0].t) == "b");
}

TEST_CASE("triples: frozen vocabulary rejects unknown symbols") {
  TempDir dir;
  Vocabulary v;
  LoadFromText(dir, "a\tp\tb\n", v);
  WriteFile(dir / "u.tsv", "a\tp\tz\n");
  CHECK_THROWS_AS(LoadTriples(dir / "u.tsv", v, VocabMode::kFrozen),
                  ParseError);
  WriteFile(dir / "k.tsv", "b\tp\ta\n");
  auto store = LoadTriples(dir / "k.tsv", v, VocabMode::kFrozen);
  CHECK(store.size() == 1);
  CHECK(v.kb_entities.Frequency(0) == 1);
}

TEST_CASE("triples: write then load round-trips") {
  TempDir dir;
  Vocabulary v;
  auto store = LoadFromText(dir, "a\tp\tb\nc\tq\ta\n", v);
  WriteTriples(dir / "out.tsv", store.triples(), v);
  Vocabulary v2;
  auto again = LoadTriples(dir / "out.tsv", v2);
  CHECK(again == store);
  CHECK(v2.kb_entities.names() == v.kb_entities.names());
}

TEST_CASE("triple store indexes") {
  TripleStore s;
  CHECK(s.Add({0, 0, 1}));
  CHECK_FALSE(s.Add({0, 0, 1}));
  s.Add({0, 0, 2});
  s.Add({2, 1, 0});
  s.Add({3, 1, 3});
  CHECK(s.Tails(0, 0).size() == 2);
  CHECK(s.Heads(1, 0).size() == 1);
  CHECK(s.Incident(0).size() == 3);
  CHECK(s.Incident(3).size() == 1);  // self-loop listed once
  CHECK(s.Incident(9).empty());
  CHECK(s.IndexesConsistent());
}

TEST_CASE("corpus: empty text has no documents") {
  Vocabulary v;
  CHECK(ParseCorpus("", v).documents.empty());
}

TEST_CASE("corpus: page header, words and anchors") {
  Vocabulary v;
  auto c = ParseCorpus("== Q9\nthe [[Q1]] rose\n", v);
  REQUIRE(c.documents.size() == 1);
  const auto& d = c.documents[0];
  REQUIRE(d.page_entity.has_value());
  CHECK(v.text_entities.Name(*d.page_entity) == "Q9");
  REQUIRE(d.tokens.size() == 3);
  CHECK(d.tokens[0] == Token::Word(*v.words.Find("the")));
  CHECK(d.tokens[1] == Token::Anchor(*v.text_entities.Find("Q1")));
  CHECK(d.tokens[2] == Token::Word(*v.words.Find("rose")));
  CHECK(v.text_entities.Frequency(*v.text_entities.Find("Q1")) == 1);
  CHECK(v.words.Frequency(*v.words.Find("the")) == 1);
}

TEST_CASE("corpus: unterminated anchor is an error") {
  Vocabulary v;
  CHECK_THROWS_AS(ParseCorpus("== P\nthe [[Q1 rose\n", v), ParseError);
}

TEST_CASE("corpus: escapes") {
  Vocabulary v;
  auto c = ParseCorpus("\\[\\[x a\\\\b\n", v);
  REQUIRE(c.documents.size() == 1);
  CHECK_FALSE(c.documents[0].page_entity.has_value());
  CHECK(v.words.Name(c.documents[0].tokens[0].id) == "[[x");
  CHECK(v.words.Name(c.documents[0].tokens[1].id) == "a\\b");
  CHECK_THROWS_AS(ParseCorpus("bad\\q\n", v), ParseError);
}

TEST_CASE("corpus: bare header starts a page-less document") {
  Vocabulary v;
  auto c = ParseCorpus("== A\nx\n==\ny\n== B\nz\n", v);
  REQUIRE(c.documents.size() == 3);
  CHECK(c.documents[0].page_entity.has_value());
  CHECK_FALSE(c.documents[1].page_entity.has_value());
  CHECK(c.TokenCount() == 3);
}

TEST_CASE("corpus: write then parse round-trips") {
  TempDir dir;
  Vocabulary v;
  auto c = ParseCorpus("== A\nw1 [[B]] \\[\\[odd back\\\\slash\n==\n[[A]] w2\n", v);
  WriteCorpus(dir / "c.txt", c, v);
  Vocabulary v2;
  auto again = LoadCorpus(dir / "c.txt", v2);
  CHECK(again == c);
  CHECK(v2.words.names() == v.words.names());
}

TEST_CASE("filters: zero thresholds keep everything") {
  TempDir dir;
  Vocabulary v;
  auto store = LoadFromText(dir, "a\tp\tb\nb\tq\tc\n", v);
  auto corpus = ParseCorpus("== A\nx y [[A]]\n", v);
  auto f = ApplyFrequencyFilters(store, corpus, v, {});
  REQUIRE(f.store.size() == 2);
  for (size_t i = 0; i < 2; ++i) {
    CHECK(TripleName(f.vocab, f.store.triples()[i]) ==
          TripleName(v, store.triples()[i]));
  }
  CHECK(f.vocab.words.Name(0) == Vocabulary::kUnknownWord);
  CHECK(f.vocab.words.size() == v.words.size() + 1);
  CHECK(f.corpus.TokenCount() == corpus.TokenCount());
  CHECK(f.vocab.text_entities == v.text_entities);
}

TEST_CASE("filters: rare entity removes its triples") {
  TempDir dir;
  Vocabulary v;
  auto store = LoadFromText(
      dir, "a\tp\tb\nb\tp\tc\nc\tp\ta\na\tp\tc\nX\tp\tb\n", v);
  auto f = ApplyFrequencyFilters(store, Corpus{}, v, {2, 0, 0});
  CHECK(f.store.size() == 4);
  CHECK_FALSE(f.vocab.kb_entities.Find("X").has_value());
  for (const auto& x : f.store.triples()) {
    CHECK(f.vocab.kb_entities.Frequency(x.h) >= 2);
    CHECK(f.vocab.kb_entities.Frequency(x.t) >= 2);
  }
}

TEST_CASE("filters: rare words collapse to the unknown word") {
  Vocabulary v;
  auto corpus = ParseCorpus("== A\nx x y [[B]] x z\n", v);
  auto f = ApplyFrequencyFilters(TripleStore{}, corpus, v, {0, 0, 2});
  CHECK(f.vocab.words.size() == 2);
  const auto& toks = f.corpus.documents[0].tokens;
  REQUIRE(toks.size() == 6);
  CHECK(toks[2] == Token::Word(0));
  CHECK(toks[5] == Token::Word(0));
  CHECK(toks[3].is_anchor());
  CHECK(f.vocab.words.Frequency(0) == 2);
  CHECK(f.vocab.words.Frequency(*f.vocab.words.Find("x")) == 3);
}

TEST_CASE("filters: applying twice is a no-op") {
  TempDir dir;
  Vocabulary v;
  auto store = LoadFromText(
      dir, "a\tp\tb\nb\tp\tc\nc\tq\ta\nd\tq\te\ne\tr\td\n", v);
  auto corpus = ParseCorpus("== A\nx x y [[B]] x z y y\n", v);
  FrequencyThresholds th{2, 2, 2};
  auto once = ApplyFrequencyFilters(store, corpus, v, th);
  auto twice = ApplyFrequencyFilters(once.store, once.corpus, once.vocab, th);
  CHECK(twice.store == once.store);
  CHECK(twice.corpus == once.corpus);
  CHECK(twice.vocab == once.vocab);
}

TEST_CASE("filters: surviving symbols meet thresholds on random inputs") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Vocabulary v;
    TripleStore store;
    for (int i = 0; i < 60; ++i) {
      Triple x{v.kb_entities.Intern("e" + std::to_string(UniformIndex(rng, 25))),
               v.relations.Intern("r" + std::to_string(UniformIndex(rng, 6))),
               v.kb_entities.Intern("e" + std::to_string(UniformIndex(rng, 25)))};
      if (store.Add(x)) {
        v.kb_entities.AddFrequency(x.h, 1);
        v.kb_entities.AddFrequency(x.t, 1);
        v.relations.AddFrequency(x.r, 1);
      }
    }
    std::string text = "== P\n";
    for (int i = 0; i < 80; ++i) text += "w" + std::to_string(UniformIndex(rng, 30)) + " ";
    auto corpus = ParseCorpus(text, v);
    FrequencyThresholds th{static_cast<int64_t>(UniformIndex(rng, 6)),
                           static_cast<int64_t>(UniformIndex(rng, 12)),
                           static_cast<int64_t>(UniformIndex(rng, 5))};
    auto f = ApplyFrequencyFilters(store, corpus, v, th);
    for (int32_t e = 0; e < f.vocab.kb_entities.size(); ++e) {
      CHECK(f.vocab.kb_entities.Frequency(e) >= th.entity_min);
    }
    for (int32_t r = 0; r < f.vocab.relations.size(); ++r) {
      CHECK(f.vocab.relations.Frequency(r) >= th.relation_min);
    }
    for (int32_t w = 1; w < f.vocab.words.size(); ++w) {
      CHECK(f.vocab.words.Frequency(w) >= th.word_min);
    }
    CHECK(f.store.IndexesConsistent());
  }
}

TEST_CASE("support set construction") {
  TempDir dir;
  Vocabulary v;
  LoadFromText(dir, "K1\tp\tK2\nK2\tp\tK3\n", v);
  ParseCorpus("[[E1]] [[E2]] [[E3]]\n", v);

  SUBCASE("empty map") {
    std::vector<std::pair<std::string, std::string>> none;
    CHECK(BuildSupportSet(v, none).support.empty());
  }
  SUBCASE("a reused KB id is dropped") {
    std::vector<std::pair<std::string, std::string>> pairs = {
        {"K1", "E1"}, {"K2", "E2"}, {"K1", "E3"}};
    auto res = BuildSupportSet(v, pairs);
    CHECK(res.support.size() == 2);
    CHECK(res.conflicts == 1);
  }
  SUBCASE("pairs naming absent entities are dropped") {
    std::vector<std::pair<std::string, std::string>> pairs = {
        {"K1", "E1"}, {"Kx", "E2"}};
    auto res = BuildSupportSet(v, pairs);
    CHECK(res.support.size() == 1);
    CHECK(res.unknown == 1);
  }
  SUBCASE("file form") {
    WriteFile(dir / "seed.tsv", "K1\tE1\nK3\tE3\n");
    auto res = BuildSupportSet(v, dir / "seed.tsv");
    CHECK(res.support.size() == 2);
    CHECK(res.support.TextOf(*v.kb_entities.Find("K3")) ==
          *v.text_entities.Find("E3"));
    CHECK(res.support.KbOf(*v.text_entities.Find("E2")) == -1);
    WriteFile(dir / "bad.tsv", "K1\n");
    CHECK_THROWS_AS(BuildSupportSet(v, dir / "bad.tsv"), ParseError);
  }
}

TEST_CASE("support: filtered-out KB entity drops its pair") {
  TempDir dir;
  Vocabulary v;
  auto store = LoadFromText(dir, "a\tp\tb\nb\tp\tc\nc\tp\tb\nX\tq\ta\n", v);
  auto corpus = ParseCorpus("[[ea]] [[ex]]\n", v);
  auto f = ApplyFrequencyFilters(store, corpus, v, {2, 0, 0});
  std::vector<std::pair<std::string, std::string>> pairs = {{"a", "ea"},
                                                            {"X", "ex"}};
  auto res = BuildSupportSet(f.vocab, pairs);
  CHECK(res.support.size() == 1);
  CHECK(res.unknown == 1);
}

namespace {

struct Star {
  TripleStore store;
  SupportSet support;
};

// X = 0 with neighbours 1..4. `supported` lists the neighbours that have
// text counterparts; X always does.
Star MakeStar(const std::vector<int32_t>& supported) {
  Star s;
  s.store.Add({0, 0, 1});
  s.store.Add({2, 1, 0});
  s.store.Add({0, 2, 3});
  s.store.Add({4, 3, 0});
  s.support.Add(0, 100);
  for (int32_t n : supported) s.support.Add(n, 100 + n);
  return s;
}

// First seed whose split selects exactly {0}.
FewShotSplit SplitSelectingX(const Star& s, double fraction) {
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    auto split = MakeFewShotSplit(s.store, s.support, fraction, seed);
    if (split.fewshot_entities == std::vector<int32_t>{0}) return split;
  }
  FAIL("no seed selects X");
  return {};
}

}  // namespace

TEST_CASE("few-shot: fraction 0 is the identity") {
  auto s = MakeStar({1, 2, 3, 4});
  auto split = MakeFewShotSplit(s.store, s.support, 0.0, 3);
  CHECK(split.train == s.store);
  CHECK(split.test.empty());
  CHECK(split.fewshot_entities.empty());
}

TEST_CASE("few-shot: fraction outside [0,1] is rejected") {
  auto s = MakeStar({});
  CHECK_THROWS_AS(MakeFewShotSplit(s.store, s.support, 1.5, 0), ArgumentError);
  CHECK_THROWS_AS(MakeFewShotSplit(s.store, s.support, -0.1, 0),
                  ArgumentError);
}

TEST_CASE("few-shot: star with every neighbour supported") {
  auto s = MakeStar({1, 2, 3, 4});
  auto split = SplitSelectingX(s, 0.2);
  CHECK(split.train.Incident(0).size() == 1);
  CHECK(split.train.triples() == std::vector<Triple>{{0, 0, 1}});
  CHECK(split.test.size() == 3);
  CHECK(split.missing_support.empty());
}

TEST_CASE("few-shot: star with two unsupported neighbours") {
  auto s = MakeStar({1, 2});
  auto split = SplitSelectingX(s, 1.0 / 3.0);
  CHECK(split.train.size() == 1);
  CHECK(split.train.Contains({0, 0, 1}));
  CHECK(split.test == std::vector<Triple>{{2, 1, 0}});
  CHECK(split.missing_support.size() == 2);
}

TEST_CASE("few-shot: an entity inside another's kept triple is dropped") {
  TripleStore store;
  store.Add({0, 0, 1});
  store.Add({0, 1, 2});
  store.Add({1, 1, 2});
  SupportSet support;
  for (int32_t e = 0; e < 3; ++e) support.Add(e, e);
  auto split = MakeFewShotSplit(store, support, 1.0, 4);
  CHECK(split.dropped_entities + split.fewshot_entities.size() == 3);
  for (int32_t e : split.fewshot_entities) {
    CHECK(split.train.Incident(e).size() == 1);
  }
}

TEST_CASE("few-shot: invariants on random graphs") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 10 + static_cast<int>(UniformIndex(rng, 30));
    TripleStore store;
    const int m = n + static_cast<int>(UniformIndex(rng, 4 * n));
    for (int i = 0; i < m; ++i) {
      store.Add({static_cast<int32_t>(UniformIndex(rng, n)),
                 static_cast<int32_t>(UniformIndex(rng, 4)),
                 static_cast<int32_t>(UniformIndex(rng, n))});
    }
    SupportSet support;
    for (int e = 0; e < n; ++e) {
      if (UniformReal(rng) < 0.7) support.Add(e, 1000 + e);
    }
    const double fraction = UniformReal(rng);
    auto split = MakeFewShotSplit(store, support, fraction, trial);

    std::set<Triple> train(split.train.triples().begin(),
                           split.train.triples().end());
    std::set<Triple> test(split.test.begin(), split.test.end());
    std::set<Triple> missing(split.missing_support.begin(),
                             split.missing_support.end());
    CHECK(test.size() == split.test.size());
    for (const auto& x : test) {
      CHECK_FALSE(train.contains(x));
      CHECK_FALSE(missing.contains(x));
      CHECK(support.HasKb(x.h));
      CHECK(support.HasKb(x.t));
    }
    for (const auto& x : missing) {
      CHECK_FALSE(train.contains(x));
      CHECK((!support.HasKb(x.h) || !support.HasKb(x.t)));
    }
    // partition of the original store
    CHECK(train.size() + test.size() + missing.size() == store.size());
    for (int32_t e : split.fewshot_entities) {
      CHECK(support.HasKb(e));
      CHECK(split.train.Incident(e).size() == 1);
    }
    CHECK(split.fewshot_entities.size() + split.dropped_entities ==
          static_cast<size_t>(std::floor(fraction * support.size() + 0.5)));
    // same seed, same split
    auto again = MakeFewShotSplit(store, support, fraction, trial);
    CHECK(again.train == split.train);
    CHECK(again.test == split.test);
  }
}

TEST_CASE("restrict to support") {
  TripleStore store;
  store.Add({0, 0, 1});
  store.Add({1, 0, 2});
  store.Add({2, 0, 0});
  SupportSet support;
  support.Add(0, 0);
  support.Add(1, 1);
  auto r = RestrictToSupport(store, support);
  CHECK(r.triples() == std::vector<Triple>{{0, 0, 1}});
}
