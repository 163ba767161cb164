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

#include "kbtext/kbe.h"

#include <cmath>

namespace kbtext {

void KbeConfig::Validate() const {
  if (!(gamma > 0.0)) throw ArgumentError("kbe gamma must be > 0");
  if (neg_per_pos < 1) throw ArgumentError("kbe neg_per_pos must be >= 1");
}

double TransEDistance(std::span<const double> h, std::span<const double> r,
                      std::span<const double> t) {
  if (h.size() != r.size() || h.size() != t.size()) {
    throw ArgumentError("TransEDistance: dimension mismatch");
  }
  double s = 0.0;
  for (size_t i = 0; i < h.size(); ++i) {
    double d = h[i] + r[i] - t[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double KbeTripleLoss(double distance, int label, double gamma) {
  return Softplus(label * (distance - gamma));
}

std::vector<MixedTriple> SampleNegatives(const MixedTriple& fact,
                                         int32_t num_entities,
                                         const KbeConfig& config, Rng& rng) {
  std::vector<MixedTriple> out;
  const bool head_ok = fact.head_table == Table::kKbEntity &&
                       config.corruption != Corruption::kTail;
  const bool tail_ok = fact.tail_table == Table::kKbEntity &&
                       config.corruption != Corruption::kHead;
  if ((!head_ok && !tail_ok) || num_entities <= 0) return out;
  out.reserve(config.neg_per_pos);
  for (int32_t i = 0; i < config.neg_per_pos; ++i) {
    bool corrupt_head = head_ok;
    if (head_ok && tail_ok) corrupt_head = (rng() >> 63) != 0;
    auto e = static_cast<int32_t>(UniformIndex(rng, num_entities));
    MixedTriple neg = fact;
    if (corrupt_head) {
      neg.triple.h = e;
    } else {
      neg.triple.t = e;
    }
    out.push_back(neg);
  }
  return out;
}

std::vector<Triple> SampleNegatives(const Triple& triple, int32_t num_entities,
                                    const KbeConfig& config, Rng& rng) {
  std::vector<Triple> out;
  for (const auto& m :
       SampleNegatives(MixedTriple{triple}, num_entities, config, rng)) {
    out.push_back(m.triple);
  }
  return out;
}

double KbeLossAndGrads(std::span<const LabeledTriple> batch,
                       const EmbeddingSpace& space, const KbeConfig& config,
                       GradBuffer& grads) {
  const int32_t dim = space.dim;
  std::vector<double> diff(dim);
  double loss = 0.0;
  for (const LabeledTriple& item : batch) {
    const Triple& x = item.fact.triple;
    auto h = space.Row(item.fact.head_table, x.h);
    auto r = space.Row(Table::kRelation, x.r);
    auto t = space.Row(item.fact.tail_table, x.t);
    double sq = 0.0;
    for (int32_t i = 0; i < dim; ++i) {
      diff[i] = h[i] + r[i] - t[i];
      sq += diff[i] * diff[i];
    }
    const double d = std::sqrt(sq);
    const double z = item.label * (d - config.gamma);
    loss += item.weight * Softplus(z);
    if (d == 0.0) continue;
    // d/dd softplus(y (d - gamma)) = y * sigmoid(y (d - gamma)).
    const double coeff = item.weight * item.label * Sigmoid(z) / d;
    auto gh = grads.At(item.fact.head_table, x.h);
    for (int32_t i = 0; i < dim; ++i) gh[i] += coeff * diff[i];
    auto gr = grads.At(Table::kRelation, x.r);
    for (int32_t i = 0; i < dim; ++i) gr[i] += coeff * diff[i];
    auto gt = grads.At(item.fact.tail_table, x.t);
    for (int32_t i = 0; i < dim; ++i) gt[i] -= coeff * diff[i];
  }
  return loss;
}

}  // namespace kbtext
