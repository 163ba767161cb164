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

#ifndef KBTEXT_KBE_H_
#define KBTEXT_KBE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "kbtext/common.h"
#include "kbtext/embedding.h"
#include "kbtext/ingest.h"

namespace kbtext {

enum class Corruption { kHead, kTail, kBoth };

struct KbeConfig {
  double gamma = 6.0;
  int32_t neg_per_pos = 8;
  Corruption corruption = Corruption::kBoth;

  void Validate() const;
};

// A triple whose endpoints may live in the text entity input table (used by
// the name-graph alignment).
struct MixedTriple {
  Triple triple;
  Table head_table = Table::kKbEntity;
  Table tail_table = Table::kKbEntity;

  bool operator==(const MixedTriple&) const = default;
};

struct LabeledTriple {
  MixedTriple fact;
  int label = 1;  // +1 positive, -1 corrupted
  double weight = 1.0;
};

// ||h + r - t||_2.
double TransEDistance(std::span<const double> h, std::span<const double> r,
                      std::span<const double> t);

// log(1 + exp(label * (distance - gamma))).
double KbeTripleLoss(double distance, int label, double gamma);

// Corrupts one slot per sample with a uniformly drawn KB entity. Slots whose
// table is not kKbEntity are never corrupted; if no slot may be corrupted the
// result is empty.
std::vector<MixedTriple> SampleNegatives(const MixedTriple& fact,
                                         int32_t num_entities,
                                         const KbeConfig& config, Rng& rng);
std::vector<Triple> SampleNegatives(const Triple& triple, int32_t num_entities,
                                    const KbeConfig& config, Rng& rng);

// Weighted sum of KbeTripleLoss over the batch; analytic gradients are added
// into `grads`. The gradient of the distance is taken as zero where
// h + r - t = 0.
double KbeLossAndGrads(std::span<const LabeledTriple> batch,
                       const EmbeddingSpace& space, const KbeConfig& config,
                       GradBuffer& grads);

}  // namespace kbtext

#endif  // KBTEXT_KBE_H_
