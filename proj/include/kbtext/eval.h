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

#ifndef KBTEXT_EVAL_H_
#define KBTEXT_EVAL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kbtext/embedding.h"
#include "kbtext/ingest.h"
#include "kbtext/vocabulary.h"

namespace kbtext {

enum class Slot { kHead, kTail };

using TripleSet = std::unordered_set<Triple, TripleHash>;

struct CandidateSet {
  int32_t relation = 0;
  Slot slot = Slot::kTail;
  std::vector<int32_t> entities;
  // True when the relation/slot was never observed in train and the
  // candidates come from the whole entity vocabulary.
  bool fallback = false;
};

// Entities observed in each (relation, slot) of the training triples.
class CandidatePools {
 public:
  CandidatePools(const TripleStore& train, int32_t num_entities);

  // Sorted distinct entities; empty if unobserved.
  std::span<const int32_t> Pool(int32_t relation, Slot slot) const;
  int32_t num_entities() const { return num_entities_; }

 private:
  int32_t num_entities_;
  std::map<std::pair<int32_t, int>, std::vector<int32_t>> pools_;
};

// Type-constrained candidates: the observed pool if it has at most `limit`
// members, otherwise `limit` members sampled uniformly without replacement.
// An empty pool falls back to sampling from every KB entity.
CandidateSet BuildCandidateSet(int32_t relation, Slot slot,
                               const CandidatePools& pools, int32_t limit,
                               Rng& rng);
CandidateSet BuildCandidateSet(int32_t relation, Slot slot,
                               const TripleStore& train, int32_t num_entities,
                               int32_t limit, Rng& rng);

// 1 + number of candidates, other than the true entity, whose substituted
// triple has a strictly smaller TransE distance than the test triple.
// Candidates forming a triple in `known_positives` are skipped; pass nullptr
// for the unfiltered rank.
int64_t FilteredRank(const Triple& test, Slot slot,
                     std::span<const int32_t> candidates,
                     const EmbeddingSpace& space,
                     const TripleSet* known_positives);

struct Metrics {
  double mr = 0.0;
  double hits1 = 0.0;
  double hits10 = 0.0;
  int64_t n = 0;

  bool operator==(const Metrics&) const = default;
};

struct EvalReport {
  std::map<int32_t, Metrics> per_relation;
  // Unweighted means over relations; n is the total query count.
  Metrics macro;

  bool empty() const { return per_relation.empty(); }
  bool operator==(const EvalReport&) const = default;
};

struct RankedQuery {
  int32_t relation = 0;
  int64_t rank = 1;
};

EvalReport AggregateRanks(std::span<const RankedQuery> ranks);

struct LinkPredictionOptions {
  int32_t candidate_limit = 1000;
  uint64_t seed = 0;
};

// Head and tail queries for every test triple, filtered against train and
// test, scored with the KB entity and relation tables.
EvalReport LinkPredictionEval(std::span<const Triple> test,
                              const TripleStore& train,
                              const EmbeddingSpace& space,
                              const LinkPredictionOptions& options);

// ---------------------------------------------------------------------------
// Analogical reasoning

inline constexpr double kManyToOneThreshold = 1.2;

// One-to-one / many-to-one relations (mean distinct tails per head at most
// kManyToOneThreshold), top `n_rel` by triple count, ties by ascending id.
std::vector<int32_t> SelectAnalogyRelations(const TripleStore& train,
                                            int32_t n_rel);

// Entities are text entity ids.
struct AnalogyExample {
  int32_t h1 = 0;
  int32_t t1 = 0;
  int32_t h2 = 0;
  int32_t t2 = 0;
  int32_t relation = 0;

  bool operator==(const AnalogyExample&) const = default;
};

// Per relation, up to `n_examples` distinct (train triple, test triple)
// pairs with all four entities supported and h1 != h2.
std::vector<AnalogyExample> BuildAnalogySet(const TripleStore& train,
                                            std::span<const Triple> test,
                                            const SupportSet& support,
                                            std::span<const int32_t> relations,
                                            int32_t n_examples, uint64_t seed);

// Samples support entities (as text ids) without replacement with
// probability proportional to their degree in the training graph.
class AnalogyCandidateSampler {
 public:
  AnalogyCandidateSampler(const SupportSet& support, const TripleStore& train);

  std::vector<int32_t> Sample(int32_t size, Rng& rng,
                              const std::unordered_set<int32_t>& exclude) const;

  int64_t Degree(int32_t text_entity) const;
  size_t pool_size() const { return pool_.size(); }

 private:
  // (text entity, degree), ascending by text id.
  std::vector<std::pair<int32_t, int64_t>> pool_;
};

// Rank of t2 by descending cosine similarity to e_h2 + e_t1 - e_h1 among the
// candidates, using text entity input rows. Ties are optimistic.
int64_t AnalogyRank(const AnalogyExample& ex, const EmbeddingSpace& space,
                    std::span<const int32_t> candidates);

struct AnalogyOptions {
  int32_t candidate_size = 1000;
  uint64_t seed = 0;
};

EvalReport AnalogyEval(std::span<const AnalogyExample> examples,
                       const EmbeddingSpace& space,
                       const AnalogyCandidateSampler& sampler,
                       const AnalogyOptions& options);

// TSV: header, one row per relation, then a __macro__ row. Columns:
// relation, n, mr, hits1, hits10.
void WriteReport(const std::filesystem::path& path, const EvalReport& report,
                 const SymbolTable& relations);

}  // namespace kbtext

#endif  // KBTEXT_EVAL_H_
