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

#ifndef KBTEXT_TRAINER_H_
#define KBTEXT_TRAINER_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kbtext/alignment.h"
#include "kbtext/embedding.h"
#include "kbtext/ingest.h"
#include "kbtext/kbe.h"
#include "kbtext/vocabulary.h"

namespace kbtext {

struct TrainConfig {
  int32_t epochs = 20;
  double lr_kbe = 0.1;
  double lr_sg = 0.025;
  int32_t threads = 1;
  // Single worker; bitwise reproducible for fixed inputs and seed.
  bool serial_deterministic = true;
  uint64_t seed = 0;
  KbeConfig kbe;
  int32_t window = 5;
  int32_t k_neg_sg = 5;
  double noise_power = 0.75;
  AlignmentConfig align;
  int32_t dim = 32;

  void Validate() const;
};

struct EpochLog {
  int32_t epoch = 0;
  double l_kb = 0.0;
  double l_sg = 0.0;
  double l_align = 0.0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  EmbeddingSpace space;
  std::vector<EpochLog> log;
};

inline constexpr double kAdagradEpsilon = 1e-10;

// accum += grad^2; row -= lr * grad / sqrt(accum + eps).
void AdagradUpdate(std::span<double> row, std::span<const double> grad,
                   std::span<double> accum, double lr);
// row -= lr * grad.
void SgdUpdate(std::span<double> row, std::span<const double> grad, double lr);

// KB entity, relation, word input and entity input rows are drawn uniformly
// from [-6/sqrt(dim), 6/sqrt(dim)]; output tables start at zero; the
// projection starts at W = I, b = 0. Each table has its own seed stream.
EmbeddingSpace InitializeSpace(const Vocabulary& vocab, int32_t dim,
                               uint64_t seed);

// Alternating joint training: each epoch runs a full KB pass (triples,
// name-graph facts, projection terms) and then a full text pass (skip-gram
// pairs, anchor alignment terms). Every update of the KB pass, and every
// update of a KB table, uses Adagrad at lr_kbe; text tables touched by the
// text pass use SGD at the decaying lr_sg. Throws ArgumentError on inconsistent inputs and
// DivergenceError when a table turns non-finite.
TrainResult Train(const TripleStore& train, const Corpus& corpus,
                  const SupportSet& support, const Vocabulary& vocab,
                  const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace kbtext

#endif  // KBTEXT_TRAINER_H_
