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

#include "kbtext/alignment.h"

#include <string>

namespace kbtext {

std::string_view AlignMethodName(AlignMethod method) {
  switch (method) {
    case AlignMethod::kNone: return "none";
    case AlignMethod::kSameEmbedding: return "same_embedding";
    case AlignMethod::kProjection: return "projection";
    case AlignMethod::kEntityName: return "entity_name";
    case AlignMethod::kAnchors: return "anchors";
  }
  return "none";
}

AlignMethod ParseAlignMethod(std::string_view name) {
  for (auto m : {AlignMethod::kNone, AlignMethod::kSameEmbedding,
                 AlignMethod::kProjection, AlignMethod::kEntityName,
                 AlignMethod::kAnchors}) {
    if (AlignMethodName(m) == name) return m;
  }
  throw ArgumentError("unknown alignment method '" + std::string(name) + "'");
}

void AlignmentConfig::Validate() const {
  if (!(lambda >= 0.0)) throw ArgumentError("lambda must be >= 0");
}

std::vector<int32_t> SharingMap::AliasVector(int32_t num_text_entities) const {
  std::vector<int32_t> alias(num_text_entities, -1);
  for (const auto& [text, kb] : cells) alias[text] = kb;
  return alias;
}

SharingMap BindSharedEmbeddings(const SupportSet& support) {
  SharingMap map;
  map.cells.reserve(support.size());
  for (const auto& [kb, text] : support.pairs()) map.cells.emplace_back(text, kb);
  return map;
}

void ApplySharing(const SharingMap& sharing, EmbeddingSpace& space) {
  if (sharing.cells.empty()) {
    space.entity_in_alias.clear();
    return;
  }
  space.entity_in_alias =
      sharing.AliasVector(space.table(Table::kEntityIn).rows());
}

double ProjectionAlignLossAndGrads(
    std::span<const std::pair<int32_t, int32_t>> pairs,
    const EmbeddingSpace& space, GradBuffer& grads, double weight) {
  const int32_t dim = space.dim;
  const auto& w = space.table(Table::kProjW);
  auto b = space.table(Table::kProjB).Row(0);
  std::vector<double> resid(dim);
  double loss = 0.0;
  for (const auto& [kb, text] : pairs) {
    auto e_sg = space.Row(Table::kEntityIn, text);
    auto e_te = space.Row(Table::kKbEntity, kb);
    double sq = 0.0;
    for (int32_t i = 0; i < dim; ++i) {
      resid[i] = Dot(w.Row(i), e_sg) + b[i] - e_te[i];
      sq += resid[i] * resid[i];
    }
    loss += weight * sq;
    // d/d resid = 2 resid.
    for (int32_t i = 0; i < dim; ++i) {
      const double g = 2.0 * weight * resid[i];
      auto gw = grads.At(Table::kProjW, i);
      for (int32_t j = 0; j < dim; ++j) gw[j] += g * e_sg[j];
    }
    auto gb = grads.At(Table::kProjB, 0);
    for (int32_t i = 0; i < dim; ++i) gb[i] += 2.0 * weight * resid[i];
    auto ge_te = grads.At(Table::kKbEntity, kb);
    for (int32_t i = 0; i < dim; ++i) ge_te[i] -= 2.0 * weight * resid[i];
    auto ge_sg = grads.At(Table::kEntityIn, text);
    for (int32_t j = 0; j < dim; ++j) {
      double s = 0.0;
      for (int32_t i = 0; i < dim; ++i) s += w.Row(i)[j] * resid[i];
      ge_sg[j] += 2.0 * weight * s;
    }
  }
  return loss;
}

void ExpandNameTriple(const Triple& x, const SupportSet& support,
                      std::vector<MixedTriple>& out) {
  const int32_t eh = support.TextOf(x.h);
  const int32_t et = support.TextOf(x.t);
  if (eh >= 0) {
    out.push_back({{eh, x.r, x.t}, Table::kEntityIn, Table::kKbEntity});
  }
  if (et >= 0) {
    out.push_back({{x.h, x.r, et}, Table::kKbEntity, Table::kEntityIn});
  }
  if (eh >= 0 && et >= 0) {
    out.push_back({{eh, x.r, et}, Table::kEntityIn, Table::kEntityIn});
  }
}

std::vector<MixedTriple> ExpandNameGraph(const TripleStore& store,
                                         const SupportSet& support) {
  std::vector<MixedTriple> out;
  for (const Triple& x : store.triples()) ExpandNameTriple(x, support, out);
  return out;
}

double AnchorAlignLossAndGrads(
    int32_t text_entity, std::span<const int32_t> context_words,
    std::span<const std::vector<int32_t>> negatives, const SupportSet& support,
    const EmbeddingSpace& space, GradBuffer& grads, double weight) {
  const int32_t kb = support.KbOf(text_entity);
  if (kb < 0) return 0.0;
  double loss = 0.0;
  for (size_t i = 0; i < context_words.size(); ++i) {
    loss += NegativeSamplingLossAndGrads(Table::kKbEntity, kb, Table::kWordOut,
                                         context_words[i], negatives[i], space,
                                         grads, weight);
  }
  return loss;
}

double AnchorAlignLossAndGrads(int32_t text_entity,
                               std::span<const int32_t> context_words,
                               const SupportSet& support,
                               const EmbeddingSpace& space, int32_t k,
                               const NoiseDistribution& noise, Rng& rng,
                               GradBuffer& grads, double weight) {
  if (!support.HasText(text_entity)) return 0.0;
  std::vector<std::vector<int32_t>> negatives(context_words.size());
  for (auto& negs : negatives) {
    negs.resize(k);
    for (auto& n : negs) n = noise.Sample(rng);
  }
  return AnchorAlignLossAndGrads(text_entity, context_words, negatives, support,
                                 space, grads, weight);
}

}  // namespace kbtext
