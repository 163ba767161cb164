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

#include "kbtext/skipgram.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kbtext {

Table CenterTable(PairKind kind) {
  return kind == PairKind::kWordWord ? Table::kWordIn : Table::kEntityIn;
}

Table ContextTable(PairKind kind) {
  return kind == PairKind::kEntityEntity ? Table::kEntityOut : Table::kWordOut;
}

size_t LinkGraph::EdgeCount() const {
  size_t n = 0;
  for (const auto& v : incoming) n += v.size();
  return n;
}

LinkGraph BuildLinkGraph(const Corpus& corpus, int32_t num_text_entities) {
  LinkGraph graph;
  graph.incoming.resize(num_text_entities);
  for (const auto& doc : corpus.documents) {
    if (!doc.page_entity) continue;
    const int32_t page = *doc.page_entity;
    for (const Token& tok : doc.tokens) {
      if (tok.is_anchor() && tok.id != page) {
        graph.incoming[tok.id].push_back(page);
      }
    }
  }
  for (auto& v : graph.incoming) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return graph;
}

void ExtractDocumentPairs(const Document& doc, int32_t window,
                          const PairSink& sink) {
  std::vector<int32_t> words;
  words.reserve(doc.tokens.size());
  for (const Token& tok : doc.tokens) {
    if (!tok.is_anchor()) words.push_back(tok.id);
  }
  const auto n_words = static_cast<int64_t>(words.size());
  int64_t pos = 0;
  for (const Token& tok : doc.tokens) {
    if (tok.is_anchor()) {
      const int64_t lo = std::max<int64_t>(0, pos - window);
      const int64_t hi = std::min<int64_t>(n_words, pos + window);
      for (int64_t q = lo; q < hi; ++q) {
        sink({PairKind::kEntityWord, tok.id, words[q]});
      }
      continue;
    }
    const int64_t lo = std::max<int64_t>(0, pos - window);
    const int64_t hi = std::min<int64_t>(n_words - 1, pos + window);
    for (int64_t q = lo; q <= hi; ++q) {
      if (q == pos) continue;
      sink({PairKind::kWordWord, words[pos], words[q]});
    }
    ++pos;
  }
}

void ForEachAnchorContext(
    const Document& doc, int32_t window,
    const std::function<void(int32_t, std::span<const int32_t>)>& fn) {
  std::vector<int32_t> words;
  words.reserve(doc.tokens.size());
  for (const Token& tok : doc.tokens) {
    if (!tok.is_anchor()) words.push_back(tok.id);
  }
  const auto n_words = static_cast<int64_t>(words.size());
  int64_t pos = 0;
  for (const Token& tok : doc.tokens) {
    if (!tok.is_anchor()) {
      ++pos;
      continue;
    }
    const int64_t lo = std::max<int64_t>(0, pos - window);
    const int64_t hi = std::min<int64_t>(n_words, pos + window);
    if (hi > lo) {
      fn(tok.id, std::span<const int32_t>(words.data() + lo, hi - lo));
    }
  }
}

void ExtractLinkPairs(const LinkGraph& graph, const PairSink& sink) {
  for (size_t e = 0; e < graph.incoming.size(); ++e) {
    for (int32_t o : graph.incoming[e]) {
      sink({PairKind::kEntityEntity, static_cast<int32_t>(e), o});
    }
  }
}

std::vector<CooccurrencePair> ExtractPairs(const Corpus& corpus,
                                           const LinkGraph& graph,
                                           int32_t window) {
  if (window < 1) throw ArgumentError("window must be >= 1");
  std::vector<CooccurrencePair> out;
  auto sink = [&](const CooccurrencePair& p) { out.push_back(p); };
  for (const auto& doc : corpus.documents) {
    ExtractDocumentPairs(doc, window, sink);
  }
  ExtractLinkPairs(graph, sink);
  return out;
}

NoiseDistribution::NoiseDistribution(std::span<const double> weights) {
  const auto n = static_cast<int32_t>(weights.size());
  if (n == 0) throw ArgumentError("noise distribution over empty namespace");
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  prob_.assign(weights.begin(), weights.end());
  if (!(total > 0.0)) {
    std::fill(prob_.begin(), prob_.end(), 1.0);
    total = n;
  }
  for (double& p : prob_) p /= total;

  // Vose's alias method.
  threshold_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<int32_t> small;
  std::vector<int32_t> large;
  for (int32_t i = 0; i < n; ++i) {
    scaled[i] = prob_[i] * n;
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    int32_t s = small.back();
    small.pop_back();
    int32_t l = large.back();
    threshold_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (int32_t i : large) {
    threshold_[i] = 1.0;
    alias_[i] = i;
  }
  for (int32_t i : small) {
    threshold_[i] = 1.0;
    alias_[i] = i;
  }
}

int32_t NoiseDistribution::Sample(Rng& rng) const {
  auto i = static_cast<int32_t>(UniformIndex(rng, prob_.size()));
  return UniformReal(rng) < threshold_[i] ? i : alias_[i];
}

double NoiseDistribution::Probability(int32_t id) const { return prob_[id]; }

NoiseDistribution BuildNoiseDistribution(const SymbolTable& table,
                                         double power) {
  if (!(power >= 0.0)) throw ArgumentError("noise power must be >= 0");
  std::vector<double> weights(table.size());
  for (int32_t i = 0; i < table.size(); ++i) {
    weights[i] = power == 0.0
                     ? 1.0
                     : std::pow(static_cast<double>(table.Frequency(i)), power);
  }
  return NoiseDistribution(weights);
}

double NegativeSamplingLossAndGrads(Table center_table, int32_t center,
                                    Table context_table, int32_t positive,
                                    std::span<const int32_t> negatives,
                                    const EmbeddingSpace& space,
                                    GradBuffer& grads, double weight) {
  const int32_t dim = space.dim;
  auto u = space.Row(center_table, center);
  std::vector<double> gu(dim, 0.0);
  double loss = 0.0;
  auto term = [&](int32_t ctx, double label) {
    auto v = space.Row(context_table, ctx);
    const double s = label * Dot(u, v);
    loss -= weight * LogSigmoid(s);
    // d/ds -log sigmoid(s) = -sigmoid(-s).
    const double g = -weight * label * Sigmoid(-s);
    auto gv = grads.At(context_table, ctx);
    for (int32_t i = 0; i < dim; ++i) {
      gv[i] += g * u[i];
      gu[i] += g * v[i];
    }
  };
  term(positive, 1.0);
  for (int32_t neg : negatives) term(neg, -1.0);
  auto gc = grads.At(center_table, center);
  for (int32_t i = 0; i < dim; ++i) gc[i] += gu[i];
  return loss;
}

double SgPairLossAndGrads(const CooccurrencePair& pair,
                          const EmbeddingSpace& space, int32_t k,
                          const NoiseDistribution& noise, Rng& rng,
                          GradBuffer& grads) {
  if (k < 1) throw ArgumentError("negative count must be >= 1");
  std::vector<int32_t> negatives(k);
  for (auto& n : negatives) n = noise.Sample(rng);
  return NegativeSamplingLossAndGrads(CenterTable(pair.kind), pair.center,
                                      ContextTable(pair.kind), pair.context,
                                      negatives, space, grads);
}

double SgEpochLoss(const Corpus& corpus, const LinkGraph& graph,
                   const EmbeddingSpace& space, int32_t window, int32_t k,
                   const NoiseModels& noises, Rng& rng) {
  GradBuffer scratch(space.dim);
  double total = 0.0;
  auto sink = [&](const CooccurrencePair& p) {
    scratch.Clear();
    total += SgPairLossAndGrads(p, space, k, noises.For(p.kind), rng, scratch);
  };
  for (const auto& doc : corpus.documents) {
    ExtractDocumentPairs(doc, window, sink);
  }
  ExtractLinkPairs(graph, sink);
  return total;
}

}  // namespace kbtext
