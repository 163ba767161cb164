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

#include <cmath>
#include <map>
#include <set>

#include "kbtext/datagen.h"
#include "test_util.h"

using namespace kbtext;

namespace {

WorldConfig Small() {
  WorldConfig c;
  c.n_entities = 200;
  c.n_relations = 8;
  c.doc_length = 20;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("same config, same world") {
  auto a = GenerateWorld(Small());
  auto b = GenerateWorld(Small());
  CHECK(a.store == b.store);
  CHECK(a.corpus == b.corpus);
  CHECK(a.vocab == b.vocab);
  CHECK(a.withheld == b.withheld);
  auto c = Small();
  c.seed = 6;
  CHECK_FALSE(GenerateWorld(c).store == a.store);
}

TEST_CASE("no text coverage") {
  auto c = Small();
  c.text_coverage = 0;
  c.withheld_fraction = 0;
  auto w = GenerateWorld(c);
  CHECK(w.support.empty());
  CHECK(w.corpus.documents.empty());
  CHECK(w.vocab.text_entities.empty());
  CHECK_FALSE(w.store.empty());
}

TEST_CASE("withheld facts on the default world") {
  WorldConfig c;
  auto w = GenerateWorld(c);
  const double frac = static_cast<double>(w.withheld.size()) / w.facts.size();
  CHECK(frac == doctest::Approx(0.1).epsilon(0.1));
  for (const auto& x : w.withheld) {
    CHECK_FALSE(w.store.Contains(x));
    CHECK(w.support.HasKb(x.h));
    CHECK(w.support.HasKb(x.t));
  }
}

TEST_CASE("withheld facts are stated in the corpus") {
  auto w = GenerateWorld(Small());
  REQUIRE_FALSE(w.withheld.empty());
  // (page, anchored entity) pairs of every document
  std::set<std::pair<int32_t, int32_t>> mentions;
  for (const auto& d : w.corpus.documents) {
    REQUIRE(d.page_entity.has_value());
    for (const auto& t : d.tokens) {
      if (t.is_anchor()) mentions.insert({*d.page_entity, t.id});
    }
  }
  for (const auto& x : w.withheld) {
    CHECK(mentions.contains({w.support.TextOf(x.h), w.support.TextOf(x.t)}));
  }
}

TEST_CASE("store agrees with its vocabulary frequencies") {
  auto w = GenerateWorld(Small());
  std::map<int32_t, int64_t> ent, rel;
  for (const auto& x : w.store.triples()) {
    ++ent[x.h];
    ++ent[x.t];
    ++rel[x.r];
  }
  for (const auto& [e, n] : ent) CHECK(w.vocab.kb_entities.Frequency(e) == n);
  for (const auto& [r, n] : rel) CHECK(w.vocab.relations.Frequency(r) == n);
  CHECK(w.store.IndexesConsistent());
}

TEST_CASE("written files load back to the same world") {
  kbtext::testing::TempDir dir;
  auto w = GenerateWorld(Small());
  WriteWorld(dir.path(), w);
  Vocabulary v;
  auto store = LoadTriples(dir / "triples.tsv", v);
  auto corpus = LoadCorpus(dir / "corpus.txt", v);
  CHECK(store == w.store);
  CHECK(corpus == w.corpus);
  CHECK(v == w.vocab);
  auto support = BuildSupportSet(v, dir / "seed_map.tsv");
  CHECK(support.support.pairs() == w.support.pairs());
  auto withheld = LoadTriples(dir / "withheld.tsv", v, VocabMode::kFrozen);
  CHECK(withheld.triples() == w.withheld);
}

TEST_CASE("every relation keeps facts in the store") {
  auto w = GenerateWorld(WorldConfig{});
  std::set<int32_t> rels;
  for (const auto& x : w.store.triples()) rels.insert(x.r);
  CHECK(rels.size() == 20);
}

TEST_CASE("infeasible configs") {
  auto c = Small();
  c.n_entities = 1;
  CHECK_THROWS_AS(GenerateWorld(c), GenerationError);
  c = Small();
  c.text_coverage = 0;
  c.withheld_fraction = 0.5;
  CHECK_THROWS_AS(GenerateWorld(c), GenerationError);
  c = Small();
  c.kb_density = 2;
  CHECK_THROWS_AS(GenerateWorld(c), ArgumentError);
}
