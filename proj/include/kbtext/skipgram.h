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

#ifndef KBTEXT_SKIPGRAM_H_
#define KBTEXT_SKIPGRAM_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kbtext/common.h"
#include "kbtext/embedding.h"
#include "kbtext/ingest.h"
#include "kbtext/vocabulary.h"

namespace kbtext {

enum class PairKind : uint8_t {
  kWordWord,      // center word, context word
  kEntityWord,    // center text entity (anchor), context word
  kEntityEntity,  // center text entity, context entity linking to it
};

struct CooccurrencePair {
  PairKind kind = PairKind::kWordWord;
  int32_t center = 0;
  int32_t context = 0;

  bool operator==(const CooccurrencePair&) const = default;
};

// Center table, context table and noise namespace of a pair kind.
Table CenterTable(PairKind kind);
Table ContextTable(PairKind kind);

// incoming[e] is the sorted set of page entities whose document anchors e.
struct LinkGraph {
  std::vector<std::vector<int32_t>> incoming;

  size_t EdgeCount() const;
};

LinkGraph BuildLinkGraph(const Corpus& corpus, int32_t num_text_entities);

using PairSink = std::function<void(const CooccurrencePair&)>;

// Word-word and entity-word pairs of one document. Anchors are elided from
// the word sequence; an anchor sitting between word positions p-1 and p takes
// the words p-c .. p+c-1 as its context.
void ExtractDocumentPairs(const Document& doc, int32_t window,
                          const PairSink& sink);
// Calls fn(entity, context_words) for every anchor of the document, with the
// same context rule as the entity-word pairs.
void ForEachAnchorContext(
    const Document& doc, int32_t window,
    const std::function<void(int32_t, std::span<const int32_t>)>& fn);
// Entity-entity pairs (e, o) for every o in incoming[e].
void ExtractLinkPairs(const LinkGraph& graph, const PairSink& sink);
// Document pairs for every document in order, then the link-graph pairs.
std::vector<CooccurrencePair> ExtractPairs(const Corpus& corpus,
                                           const LinkGraph& graph,
                                           int32_t window);

// Sampling distribution over one vocabulary namespace with weights
// frequency^power.
class NoiseDistribution {
 public:
  NoiseDistribution() = default;
  explicit NoiseDistribution(std::span<const double> weights);

  int32_t Sample(Rng& rng) const;
  double Probability(int32_t id) const;
  int32_t size() const { return static_cast<int32_t>(prob_.size()); }

 private:
  std::vector<double> prob_;
  // Walker alias table.
  std::vector<double> threshold_;
  std::vector<int32_t> alias_;
};

NoiseDistribution BuildNoiseDistribution(const SymbolTable& table,
                                         double power);

struct NoiseModels {
  NoiseDistribution words;
  NoiseDistribution entities;

  const NoiseDistribution& For(PairKind kind) const {
    return kind == PairKind::kEntityEntity ? entities : words;
  }
};

// -log sigmoid(u.v+) - sum_i log sigmoid(-u.v-_i), where u is the center row
// and v are rows of the context table. Gradients (scaled by `weight`) are
// added into `grads`; the returned loss is scaled by `weight` as well.
double NegativeSamplingLossAndGrads(Table center_table, int32_t center,
                                    Table context_table, int32_t positive,
                                    std::span<const int32_t> negatives,
                                    const EmbeddingSpace& space,
                                    GradBuffer& grads, double weight = 1.0);

// Draws k negatives from `noise` and evaluates the pair's loss.
double SgPairLossAndGrads(const CooccurrencePair& pair,
                          const EmbeddingSpace& space, int32_t k,
                          const NoiseDistribution& noise, Rng& rng,
                          GradBuffer& grads);

// Sum of pair losses over every extracted pair. Monitoring only: no
// parameters change.
double SgEpochLoss(const Corpus& corpus, const LinkGraph& graph,
                   const EmbeddingSpace& space, int32_t window, int32_t k,
                   const NoiseModels& noises, Rng& rng);

}  // namespace kbtext

#endif  // KBTEXT_SKIPGRAM_H_
