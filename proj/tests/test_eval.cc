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
#include <set>

#include "kbtext/eval.h"
#include "test_util.h"
#include "toy_world.h"

using namespace kbtext;

namespace {

// Places entity rows on a line so that every candidate distance is chosen
// by hand: with h = 0 and r = 0, d(h, r, e) = |x_e|.
EmbeddingSpace LineSpace(const std::vector<double>& xs) {
  auto s = oracle::MakeSpace(1, static_cast<int32_t>(xs.size()), 1, 0, 0);
  for (size_t i = 0; i < xs.size(); ++i) {
    s.Row(Table::kKbEntity, static_cast<int32_t>(i))[0] = xs[i];
  }
  return s;
}

}  // namespace

TEST_CASE("candidates: small pool is returned whole") {
  TripleStore train;
  train.Add({0, 0, 1});
  train.Add({2, 0, 3});
  train.Add({4, 0, 5});
  Rng rng(0);
  auto c = BuildCandidateSet(0, Slot::kTail, train, 10, 1000, rng);
  CHECK(c.entities == std::vector<int32_t>{1, 3, 5});
  CHECK_FALSE(c.fallback);
}

TEST_CASE("candidates: large pool is sampled without replacement") {
  TripleStore train;
  for (int32_t i = 0; i < 2000; ++i) train.Add({i, 0, (i * 7) % 2000});
  CandidatePools pools(train, 2000);
  Rng rng(1);
  auto c = BuildCandidateSet(0, Slot::kHead, pools, 1000, rng);
  CHECK(c.entities.size() == 1000);
  std::set<int32_t> distinct(c.entities.begin(), c.entities.end());
  CHECK(distinct.size() == 1000);
  for (int32_t e : c.entities) CHECK((e >= 0 && e < 2000));
}

TEST_CASE("candidates: unobserved slot falls back to every entity") {
  TripleStore train;
  train.Add({0, 0, 1});
  Rng rng(2);
  auto c = BuildCandidateSet(1, Slot::kTail, train, 7, 1000, rng);
  CHECK(c.fallback);
  CHECK(c.entities.size() == 7);
  CHECK_THROWS_AS(BuildCandidateSet(0, Slot::kTail, train, 7, 0, rng),
                  ArgumentError);
}

TEST_CASE("filtered rank examples") {
  SUBCASE("only the true entity") {
    auto s = LineSpace({0, 0.1});
    std::vector<int32_t> cands = {1};
    CHECK(FilteredRank({0, 0, 1}, Slot::kTail, cands, s, nullptr) == 1);
  }
  SUBCASE("hand-counted rank 2") {
    // truth 0.1; others 0.05, 0.2, 0.2
    auto s = LineSpace({0, 0.1, 0.05, 0.2, -0.2});
    std::vector<int32_t> cands = {1, 2, 3, 4};
    TripleSet none;
    CHECK(FilteredRank({0, 0, 1}, Slot::kTail, cands, s, &none) == 2);
  }
  SUBCASE("known positive is filtered out") {
    auto s = LineSpace({0, 0.1, 0.05, 0.2});
    std::vector<int32_t> cands = {1, 2, 3};
    TripleSet known = {{0, 0, 2}};
    CHECK(FilteredRank({0, 0, 1}, Slot::kTail, cands, s, &known) == 1);
    CHECK(FilteredRank({0, 0, 1}, Slot::kTail, cands, s, nullptr) == 2);
  }
  SUBCASE("ties are optimistic") {
    auto s = LineSpace({0, 0.1, -0.1});
    std::vector<int32_t> cands = {1, 2};
    CHECK(FilteredRank({0, 0, 1}, Slot::kTail, cands, s, nullptr) == 1);
  }
}

TEST_CASE("link prediction: empty and perfect cases") {
  auto s = LineSpace({0, 0.0, 5.0});
  TripleStore train;
  train.Add({0, 0, 2});
  CHECK(LinkPredictionEval({}, train, s, {}).empty());
  std::vector<Triple> test = {{0, 0, 1}};
  // tail query pool {2}: d=5 vs truth 0; head query pool {0}: only truth
  auto r = LinkPredictionEval(test, train, s, {});
  CHECK(r.macro.mr == 1.0);
  CHECK(r.macro.hits1 == 1.0);
  CHECK(r.macro.hits10 == 1.0);
  CHECK(r.macro.n == 2);
}

TEST_CASE("link prediction matches the brute-force oracle") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto w = oracle::MakeToyWorld(seed);
    auto got = LinkPredictionEval(w.test, w.train, w.space, {1000, seed});
    auto brute_ranks =
        oracle::BruteLinkRanks(w.train.triples(), w.test, w.space, w.kEntities);
    auto brute = oracle::BruteMacro(brute_ranks);
    REQUIRE(got.per_relation.size() == brute_ranks.size());
    CHECK(got.macro.mr == brute.mr);
    CHECK(got.macro.hits1 == brute.hits1);
    CHECK(got.macro.hits10 == brute.hits10);
    CHECK(got.macro.n == brute.n);
    for (const auto& [rel, ranks] : brute_ranks) {
      double sum = 0;
      for (long r : ranks) sum += static_cast<double>(r);
      CHECK(got.per_relation.at(rel).mr == sum / ranks.size());
    }
  }
}

TEST_CASE("aggregation") {
  std::vector<RankedQuery> q = {{0, 1}, {0, 3}, {2, 12}};
  auto r = AggregateRanks(q);
  CHECK(r.per_relation.at(0).mr == 2.0);
  CHECK(r.per_relation.at(0).hits1 == 0.5);
  CHECK(r.per_relation.at(2).hits10 == 0.0);
  CHECK(r.macro.mr == 7.0);
  CHECK(r.macro.hits10 == 0.5);
  CHECK(r.macro.n == 3);
}

TEST_CASE("analogy relation selection") {
  TripleStore train;
  // r0: one tail per head (4 triples)
  for (int32_t h = 0; h < 4; ++h) train.Add({h, 0, 10 + h});
  // r1: three tails per head
  for (int32_t t = 0; t < 3; ++t) {
    train.Add({0, 1, 20 + t});
    train.Add({1, 1, 30 + t});
  }
  // r2 and r3: one-to-one, equal counts
  for (int32_t h = 0; h < 2; ++h) {
    train.Add({h, 3, 40 + h});
    train.Add({h, 2, 50 + h});
  }
  CHECK(SelectAnalogyRelations(train, 10) == std::vector<int32_t>{0, 2, 3});
  CHECK(SelectAnalogyRelations(train, 2) == std::vector<int32_t>{0, 2});
  CHECK_THROWS_AS(SelectAnalogyRelations(train, 0), ArgumentError);
}

TEST_CASE("analogy set") {
  SupportSet support;
  for (int32_t e = 0; e < 8; ++e) support.Add(e, 100 + e);
  TripleStore train;
  train.Add({0, 0, 1});
  std::vector<int32_t> rels = {0, 1};

  SUBCASE("relation without test triples") {
    std::vector<Triple> test = {{2, 1, 3}};
    auto set = BuildAnalogySet(train, test, support, std::vector<int32_t>{0}, 5, 0);
    CHECK(set.empty());
  }
  SUBCASE("one train and one test triple") {
    std::vector<Triple> test = {{2, 0, 3}};
    auto set = BuildAnalogySet(train, test, support, rels, 5, 0);
    REQUIRE(set.size() == 1);
    CHECK(set[0] == AnalogyExample{100, 101, 102, 103, 0});
  }
  SUBCASE("invariants hold on random inputs") {
    Rng rng(4);
    TripleStore big;
    std::vector<Triple> test;
    for (int i = 0; i < 60; ++i) {
      Triple x{static_cast<int32_t>(UniformIndex(rng, 12)),
               static_cast<int32_t>(UniformIndex(rng, 2)),
               static_cast<int32_t>(UniformIndex(rng, 12))};
      if (i % 3 == 0) {
        test.push_back(x);
      } else {
        big.Add(x);
      }
    }
    auto set = BuildAnalogySet(big, test, support, rels, 7, 9);
    std::set<std::tuple<int, int, int, int, int>> seen;
    for (const auto& ex : set) {
      CHECK(ex.h1 != ex.h2);
      for (int32_t e : {ex.h1, ex.t1, ex.h2, ex.t2}) CHECK(support.HasText(e));
      CHECK(big.Contains({support.KbOf(ex.h1), ex.relation, support.KbOf(ex.t1)}));
      CHECK(std::find(test.begin(), test.end(),
                      Triple{support.KbOf(ex.h2), ex.relation,
                             support.KbOf(ex.t2)}) != test.end());
      CHECK(seen.insert({ex.h1, ex.t1, ex.h2, ex.t2, ex.relation}).second);
    }
    CHECK(BuildAnalogySet(big, test, support, rels, 7, 9) == set);
  }
}

TEST_CASE("analogy rank examples") {
  auto s = oracle::MakeSpace(3, 0, 0, 0, 6);
  // h1 = 0, t1 = 1, h2 = 2: query = e2 + e1 - e0 = (1, 0, 0)
  s.Row(Table::kEntityIn, 0)[1] = 1;
  s.Row(Table::kEntityIn, 1)[1] = 1;
  s.Row(Table::kEntityIn, 2)[0] = 1;
  SUBCASE("exact match, orthogonal rivals") {
    s.Row(Table::kEntityIn, 3)[0] = 2;
    s.Row(Table::kEntityIn, 4)[2] = 1;
    std::vector<int32_t> cands = {3, 4};
    CHECK(AnalogyRank({0, 1, 2, 3, 0}, s, cands) == 1);
  }
  SUBCASE("cosines 0.9 and 0.5") {
    auto set = [&](int32_t e, double c) {
      s.Row(Table::kEntityIn, e)[0] = c;
      s.Row(Table::kEntityIn, e)[2] = std::sqrt(1 - c * c);
    };
    set(4, 0.9);
    set(5, 0.5);
    std::vector<int32_t> cands = {4, 5};
    CHECK(AnalogyRank({0, 1, 2, 5, 0}, s, cands) == 2);
  }
  SUBCASE("zero query scores everything 0") {
    s.Row(Table::kEntityIn, 2)[0] = 0;
    s.Row(Table::kEntityIn, 3)[0] = 1;
    std::vector<int32_t> cands = {3, 4};
    CHECK(AnalogyRank({0, 1, 2, 4, 0}, s, cands) == 1);
  }
}

TEST_CASE("analogy rank is invariant to scale and rotation") {
  auto w = oracle::MakeToyWorld(3);
  std::vector<int32_t> cands = {0, 1, 2, 3, 4, 5, 6, 7};
  const AnalogyExample ex{9, 10, 11, 4, 0};
  const auto base = AnalogyRank(ex, w.space, cands);
  auto scaled = w.space;
  for (double& v : scaled.table(Table::kEntityIn).values()) v *= 3.7;
  CHECK(AnalogyRank(ex, scaled, cands) == base);
  // rotation in the (0, 1) plane
  auto rotated = w.space;
  const double c = std::cos(0.8), s = std::sin(0.8);
  for (int32_t e = 0; e < 12; ++e) {
    auto row = rotated.Row(Table::kEntityIn, e);
    const double a = row[0], b = row[1];
    row[0] = c * a - s * b;
    row[1] = s * a + c * b;
  }
  CHECK(AnalogyRank(ex, rotated, cands) == base);
}

TEST_CASE("candidate sampler") {
  TripleStore train;
  SupportSet support;
  for (int32_t e = 0; e < 10; ++e) support.Add(e, 20 + e);
  // star: every entity linked once to 0 (which has degree 9)
  for (int32_t e = 1; e < 10; ++e) train.Add({0, 0, e});
  AnalogyCandidateSampler sampler(support, train);
  CHECK(sampler.Degree(20) == 9);
  CHECK(sampler.Degree(21) == 1);

  SUBCASE("pool smaller than the request") {
    Rng rng(0);
    auto got = sampler.Sample(50, rng, {});
    CHECK(got.size() == 10);
  }
  SUBCASE("exclusions are honoured") {
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
      for (int32_t e : sampler.Sample(3, rng, {20, 23})) {
        CHECK(e != 20);
        CHECK(e != 23);
      }
    }
  }
  SUBCASE("equal degrees give uniform draws") {
    TripleStore ring;
    for (int32_t e = 0; e < 10; ++e) ring.Add({e, 0, (e + 1) % 10});
    AnalogyCandidateSampler uniform(support, ring);
    Rng rng(2);
    std::vector<double> counts(10, 0.0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) counts[uniform.Sample(1, rng, {})[0] - 20] += 1;
    std::vector<double> expected(10, draws / 10.0);
    CHECK(oracle::ChiSquare(counts, expected) < oracle::ChiSquareBound(9));
  }
  SUBCASE("single draws follow degree") {
    Rng rng(3);
    std::vector<double> counts(10, 0.0);
    const int draws = 90000;
    for (int i = 0; i < draws; ++i) counts[sampler.Sample(1, rng, {})[0] - 20] += 1;
    std::vector<double> expected(10, draws / 18.0);
    expected[0] = draws / 2.0;
    CHECK(oracle::ChiSquare(counts, expected) < oracle::ChiSquareBound(9));
  }
}

TEST_CASE("analogy eval") {
  SupportSet support;
  TripleStore train;
  CHECK(AnalogyEval({}, oracle::MakeSpace(2, 0, 0, 0, 1),
                    AnalogyCandidateSampler(support, train), {})
            .empty());
}

TEST_CASE("analogy eval matches the brute-force oracle") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto w = oracle::MakeToyWorld(seed);
    auto rels = SelectAnalogyRelations(w.train, 10);
    auto examples = BuildAnalogySet(w.train, w.test, w.support, rels, 100, seed);
    REQUIRE_FALSE(examples.empty());
    AnalogyCandidateSampler sampler(w.support, w.train);
    auto got = AnalogyEval(examples, w.space, sampler, {1000, seed});

    std::map<int, std::vector<long>> ranks;
    for (const auto& ex : examples) {
      std::vector<int32_t> cands;
      for (const auto& [kb, text] : w.support.pairs()) {
        if (text != ex.h1 && text != ex.h2 && text != ex.t1) cands.push_back(text);
      }
      ranks[ex.relation].push_back(
          oracle::BruteAnalogyRank(w.space, ex.h1, ex.t1, ex.h2, ex.t2, cands));
    }
    auto brute = oracle::BruteMacro(ranks);
    CHECK(got.macro.mr == brute.mr);
    CHECK(got.macro.hits1 == brute.hits1);
    CHECK(got.macro.hits10 == brute.hits10);
    CHECK(got.macro.n == brute.n);
  }
}

TEST_CASE("report format") {
  kbtext::testing::TempDir dir;
  SymbolTable rels;
  rels.Intern("born_in");
  rels.Intern("capital_of");
  std::vector<RankedQuery> q = {{0, 1}, {1, 4}};
  WriteReport(dir / "r.tsv", AggregateRanks(q), rels);
  CHECK(kbtext::testing::ReadFile(dir / "r.tsv") ==
        "relation\tn\tmr\thits1\thits10\n"
        "born_in\t1\t1\t1\t1\n"
        "capital_of\t1\t4\t0\t1\n"
        "__macro__\t2\t2.5\t0.5\t1\n");
}
