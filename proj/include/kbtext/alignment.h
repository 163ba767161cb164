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

#ifndef KBTEXT_ALIGNMENT_H_
#define KBTEXT_ALIGNMENT_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "kbtext/embedding.h"
#include "kbtext/ingest.h"
#include "kbtext/kbe.h"
#include "kbtext/skipgram.h"

namespace kbtext {

enum class AlignMethod {
  kNone,           // independent KB and text models
  kSameEmbedding,  // support pairs share one storage cell
  kProjection,     // ||W e_SG + b - e_TE||^2
  kEntityName,     // name-graph triples over text entity rows
  kAnchors,        // KB rows predict anchor context words
};

std::string_view AlignMethodName(AlignMethod method);
// Throws ArgumentError on an unknown name.
AlignMethod ParseAlignMethod(std::string_view name);

struct AlignmentConfig {
  AlignMethod method = AlignMethod::kNone;
  double lambda = 0.0;

  void Validate() const;
};

// Declares text entity input rows that are stored in KB entity rows.
struct SharingMap {
  // (text entity, kb entity)
  std::vector<std::pair<int32_t, int32_t>> cells;

  // Alias vector suitable for EmbeddingSpace::entity_in_alias.
  std::vector<int32_t> AliasVector(int32_t num_text_entities) const;
};

SharingMap BindSharedEmbeddings(const SupportSet& support);

// Installs the sharing map. The KB rows keep their values.
void ApplySharing(const SharingMap& sharing, EmbeddingSpace& space);

// sum over pairs of ||W e_SG + b - e_TE||^2 with e_SG the text entity input
// row and e_TE the KB entity row. `pairs` holds (kb, text) ids. Loss and
// gradients are scaled by `weight`.
double ProjectionAlignLossAndGrads(
    std::span<const std::pair<int32_t, int32_t>> pairs,
    const EmbeddingSpace& space, GradBuffer& grads, double weight = 1.0);

// Name-graph facts derived from one KB triple: (e_h, r, t) if h is supported,
// (h, r, e_t) if t is supported, and (e_h, r, e_t) if both are.
void ExpandNameTriple(const Triple& triple, const SupportSet& support,
                      std::vector<MixedTriple>& out);
std::vector<MixedTriple> ExpandNameGraph(const TripleStore& store,
                                         const SupportSet& support);

// Negative-sampling loss of the KB counterpart of `text_entity` predicting
// each context word (word output rows). Zero with no gradients when the
// entity has no counterpart. Loss and gradients are scaled by `weight`.
double AnchorAlignLossAndGrads(int32_t text_entity,
                               std::span<const int32_t> context_words,
                               const SupportSet& support,
                               const EmbeddingSpace& space, int32_t k,
                               const NoiseDistribution& noise, Rng& rng,
                               GradBuffer& grads, double weight = 1.0);

// Same, with explicit negatives: negatives[i] holds the k negatives of
// context_words[i].
double AnchorAlignLossAndGrads(
    int32_t text_entity, std::span<const int32_t> context_words,
    std::span<const std::vector<int32_t>> negatives, const SupportSet& support,
    const EmbeddingSpace& space, GradBuffer& grads, double weight = 1.0);

inline double TotalLoss(double l_kb, double l_sg, double l_align,
                        double lambda) {
  return l_kb + l_sg + lambda * l_align;
}

}  // namespace kbtext

#endif  // KBTEXT_ALIGNMENT_H_
