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

#include "kbtext/trainer.h"

#include <algorithm>
#include <array>
#include <cassert>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <thread>

#include "kbtext/skipgram.h"

namespace kbtext {

void TrainConfig::Validate() const {
  if (epochs < 0) throw ArgumentError("epochs must be >= 0");
  if (!(lr_kbe > 0.0) || !(lr_sg > 0.0)) {
    throw ArgumentError("learning rates must be > 0");
  }
  if (threads < 1) throw ArgumentError("threads must be >= 1");
  if (serial_deterministic && threads != 1) {
    throw ArgumentError("serial deterministic mode requires threads = 1");
  }
  if (window < 1) throw ArgumentError("window must be >= 1");
  if (k_neg_sg < 1) throw ArgumentError("k_neg_sg must be >= 1");
  if (dim < 1) throw ArgumentError("dim must be >= 1");
  if (!(noise_power >= 0.0)) throw ArgumentError("noise_power must be >= 0");
  kbe.Validate();
  align.Validate();
}

namespace {

inline void AdagradStep(std::span<double> row, std::span<const double> grad,
                        std::span<double> accum, double lr, double scale) {
  for (size_t i = 0; i < row.size(); ++i) {
    const double g = scale * grad[i];
    [[maybe_unused]] const double before = accum[i];
    accum[i] += g * g;
    assert(accum[i] >= before);
    row[i] -= lr * g / std::sqrt(accum[i] + kAdagradEpsilon);
  }
}

inline void SgdStep(std::span<double> row, std::span<const double> grad,
                    double lr) {
  for (size_t i = 0; i < row.size(); ++i) row[i] -= lr * grad[i];
}

}  // namespace

void AdagradUpdate(std::span<double> row, std::span<const double> grad,
                   std::span<double> accum, double lr) {
  if (row.size() != grad.size() || row.size() != accum.size()) {
    throw ArgumentError("AdagradUpdate: dimension mismatch");
  }
  AdagradStep(row, grad, accum, lr, 1.0);
}

void SgdUpdate(std::span<double> row, std::span<const double> grad,
               double lr) {
  if (row.size() != grad.size()) {
    throw ArgumentError("SgdUpdate: dimension mismatch");
  }
  SgdStep(row, grad, lr);
}

EmbeddingSpace InitializeSpace(const Vocabulary& vocab, int32_t dim,
                               uint64_t seed) {
  if (dim < 1) throw ArgumentError("dim must be >= 1");
  EmbeddingSpace space;
  space.dim = dim;
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  auto uniform_table = [&](Table t, int32_t rows) {
    EmbeddingTable table(rows, dim);
    Rng rng(DeriveSeed(seed, TableName(t)));
    for (double& v : table.values()) v = bound * (2.0 * UniformReal(rng) - 1.0);
    space.table(t) = std::move(table);
  };
  uniform_table(Table::kKbEntity, vocab.kb_entities.size());
  uniform_table(Table::kRelation, vocab.relations.size());
  uniform_table(Table::kWordIn, vocab.words.size());
  uniform_table(Table::kEntityIn, vocab.text_entities.size());
  space.table(Table::kWordOut) = EmbeddingTable(vocab.words.size(), dim);
  space.table(Table::kEntityOut) = EmbeddingTable(vocab.text_entities.size(), dim);
  EmbeddingTable w(dim, dim);
  for (int32_t i = 0; i < dim; ++i) w.Row(i)[i] = 1.0;
  space.table(Table::kProjW) = std::move(w);
  space.table(Table::kProjB) = EmbeddingTable(1, dim);
  return space;
}

namespace {

void CheckInputs(const TripleStore& train, const Corpus& corpus,
                 const SupportSet& support, const Vocabulary& vocab) {
  for (const Triple& x : train.triples()) {
    if (!vocab.kb_entities.Contains(x.h) || !vocab.kb_entities.Contains(x.t) ||
        !vocab.relations.Contains(x.r)) {
      throw ArgumentError("training triple references an unknown id");
    }
  }
  for (const auto& doc : corpus.documents) {
    if (doc.page_entity && !vocab.text_entities.Contains(*doc.page_entity)) {
      throw ArgumentError("corpus page entity references an unknown id");
    }
    for (const Token& tok : doc.tokens) {
      const auto& table = tok.is_anchor() ? vocab.text_entities : vocab.words;
      if (!table.Contains(tok.id)) {
        throw ArgumentError("corpus token references an unknown id");
      }
    }
  }
  for (const auto& [kb, text] : support.pairs()) {
    if (!vocab.kb_entities.Contains(kb) ||
        !vocab.text_entities.Contains(text)) {
      throw ArgumentError("support pair references an unknown id");
    }
  }
}

// Adagrad accumulators: KB-owned tables, plus text entity input rows, which
// KB-pass alignment terms (projection, name-graph facts) also step with
// Adagrad.
class OptimizerState {
 public:
  explicit OptimizerState(const EmbeddingSpace& space) {
    for (Table t : {Table::kKbEntity, Table::kRelation, Table::kProjW,
                    Table::kProjB, Table::kEntityIn}) {
      accum_[static_cast<int>(t)] =
          EmbeddingTable(space.table(t).rows(), space.dim);
    }
  }
  std::span<double> Row(Table t, int32_t row) {
    return accum_[static_cast<int>(t)].Row(row);
  }

 private:
  std::array<EmbeddingTable, kNumTables> accum_;
};

// Runs fn(worker) on `workers` threads, or inline for a single worker.
template <typename Fn>
void RunWorkers(int32_t workers, Fn&& fn) {
  if (workers == 1) {
    fn(0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int32_t w = 0; w < workers; ++w) pool.emplace_back(fn, w);
  for (auto& t : pool) t.join();
}

class JointTrainer {
 public:
  JointTrainer(const TripleStore& train, const Corpus& corpus,
               const SupportSet& support, const Vocabulary& vocab,
               const TrainConfig& config)
      : train_(train),
        corpus_(corpus),
        support_(support),
        config_(config),
        space_(InitializeSpace(vocab, config.dim,
                               DeriveSeed(config.seed, "init"))),
        graph_(BuildLinkGraph(corpus, vocab.text_entities.size())),
        num_kb_entities_(vocab.kb_entities.size()) {
    if (config.align.method == AlignMethod::kSameEmbedding) {
      ApplySharing(BindSharedEmbeddings(support), space_);
    }
    optimizer_.emplace(space_);
    if (!vocab.words.empty()) {
      noises_.words = BuildNoiseDistribution(vocab.words, config.noise_power);
    }
    if (!vocab.text_entities.empty()) {
      noises_.entities =
          BuildNoiseDistribution(vocab.text_entities, config.noise_power);
    }
    for (int32_t d = 0; d < static_cast<int32_t>(corpus.documents.size());
         ++d) {
      text_items_.push_back(d);
    }
    for (int32_t e = 0; e < static_cast<int32_t>(graph_.incoming.size());
         ++e) {
      if (!graph_.incoming[e].empty()) text_items_.push_back(-1 - e);
    }
  }

  TrainResult Run(const std::function<void(const EpochLog&)>& on_epoch) {
    TrainResult result;
    for (int32_t epoch = 0; epoch < config_.epochs; ++epoch) {
      auto start = std::chrono::steady_clock::now();
      EpochLog log;
      log.epoch = epoch + 1;
      KbPass(epoch, log);
      TextPass(epoch, log);
      log.wall_seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
      if (!space_.AllFinite() || !std::isfinite(log.l_kb) ||
          !std::isfinite(log.l_sg) || !std::isfinite(log.l_align)) {
        throw DivergenceError("non-finite parameters after epoch " +
                              std::to_string(epoch + 1));
      }
      result.log.push_back(log);
      if (on_epoch) on_epoch(log);
    }
    result.space = std::move(space_);
    return result;
  }

 private:
  double TextLearningRate(int64_t progress) const {
    const double total =
        static_cast<double>(config_.epochs) * text_items_.size();
    const double frac = total > 0 ? 1.0 - progress / total : 1.0;
    return config_.lr_sg * std::max(1e-4, frac);
  }

  // Applies `grads * scale`. KB tables and every row touched by a KB-pass
  // term take Adagrad; skip-gram and anchor terms step text tables with SGD
  // at `lr_text`. Shared cells take the optimizer of their logical table.
  void Apply(const GradBuffer& grads, double scale, double lr_text,
             bool kb_pass) {
    for (size_t i = 0; i < grads.size(); ++i) {
      const auto& key = grads.key(i);
      auto [table, row] = space_.Resolve(key.table, key.row);
      auto values = space_.table(table).Row(row);
      if (IsKbTable(key.table) || kb_pass) {
        AdagradStep(values, grads.grad(i), optimizer_->Row(table, row),
                    config_.lr_kbe, scale);
      } else {
        SgdStep(values, grads.grad(i), lr_text * scale);
      }
    }
  }

  void KbPass(int32_t epoch, EpochLog& log) {
    const auto& triples = train_.triples();
    const int32_t workers = config_.threads;
    const double lambda = config_.align.lambda;
    const AlignMethod method = config_.align.method;

    std::vector<int32_t> order(triples.size());
    std::iota(order.begin(), order.end(), 0);
    Rng order_rng(DeriveSeed(config_.seed, "kb-order", epoch));
    Shuffle(order, order_rng);

    std::vector<double> l_kb(workers, 0.0);
    std::vector<double> l_align(workers, 0.0);
    RunWorkers(workers, [&](int32_t w) {
      const uint64_t stream = static_cast<uint64_t>(epoch) * workers + w;
      Rng rng(DeriveSeed(config_.seed, "kb-negatives", stream));
      Rng name_rng(DeriveSeed(config_.seed, "name-negatives", stream));
      GradBuffer grads(config_.dim);
      std::vector<LabeledTriple> batch;
      std::vector<MixedTriple> name_facts;
      auto train_fact = [&](const MixedTriple& fact, Rng& neg_rng) {
        batch.clear();
        batch.push_back({fact, 1, 1.0});
        for (const auto& neg :
             SampleNegatives(fact, num_kb_entities_, config_.kbe, neg_rng)) {
          batch.push_back({neg, -1, 1.0});
        }
        grads.Clear();
        return KbeLossAndGrads(batch, space_, config_.kbe, grads);
      };
      for (size_t i = w; i < order.size(); i += workers) {
        const Triple& x = triples[order[i]];
        l_kb[w] += train_fact(MixedTriple{x}, rng);
        Apply(grads, 1.0, 0.0, true);
        if (method == AlignMethod::kEntityName) {
          name_facts.clear();
          ExpandNameTriple(x, support_, name_facts);
          for (const auto& fact : name_facts) {
            l_align[w] += train_fact(fact, name_rng);
            Apply(grads, lambda, 0.0, true);
          }
        }
      }
    });

    if (method == AlignMethod::kProjection) {
      const auto& pairs = support_.pairs();
      std::vector<int32_t> pair_order(pairs.size());
      std::iota(pair_order.begin(), pair_order.end(), 0);
      Rng pair_rng(DeriveSeed(config_.seed, "projection-order", epoch));
      Shuffle(pair_order, pair_rng);
      RunWorkers(workers, [&](int32_t w) {
        GradBuffer grads(config_.dim);
        for (size_t i = w; i < pair_order.size(); i += workers) {
          grads.Clear();
          l_align[w] +=
              ProjectionAlignLossAndGrads({&pairs[pair_order[i]], 1}, space_,
                                          grads);
          Apply(grads, lambda, 0.0, true);
        }
      });
    }
    for (int32_t w = 0; w < workers; ++w) {
      log.l_kb += l_kb[w];
      log.l_align += l_align[w];
    }
  }

  void TextPass(int32_t epoch, EpochLog& log) {
    const int32_t workers = config_.threads;
    const double lambda = config_.align.lambda;
    const bool anchors = config_.align.method == AlignMethod::kAnchors;
    const int64_t base = static_cast<int64_t>(epoch) * text_items_.size();

    std::vector<int32_t> order = text_items_;
    Rng order_rng(DeriveSeed(config_.seed, "text-order", epoch));
    Shuffle(order, order_rng);

    std::vector<double> l_sg(workers, 0.0);
    std::vector<double> l_align(workers, 0.0);
    RunWorkers(workers, [&](int32_t w) {
      const uint64_t stream = static_cast<uint64_t>(epoch) * workers + w;
      Rng rng(DeriveSeed(config_.seed, "sg-negatives", stream));
      Rng anchor_rng(DeriveSeed(config_.seed, "anchor-negatives", stream));
      GradBuffer grads(config_.dim);
      double lr = config_.lr_sg;
      auto train_pair = [&](const CooccurrencePair& p) {
        grads.Clear();
        l_sg[w] += SgPairLossAndGrads(p, space_, config_.k_neg_sg,
                                      noises_.For(p.kind), rng, grads);
        Apply(grads, 1.0, lr, false);
      };
      auto train_anchor = [&](int32_t entity,
                              std::span<const int32_t> context) {
        if (!support_.HasText(entity)) return;
        grads.Clear();
        l_align[w] += AnchorAlignLossAndGrads(entity, context, support_, space_,
                                              config_.k_neg_sg, noises_.words,
                                              anchor_rng, grads);
        Apply(grads, lambda, lr, false);
      };
      for (size_t i = w; i < order.size(); i += workers) {
        lr = TextLearningRate(base + static_cast<int64_t>(i));
        const int32_t item = order[i];
        if (item >= 0) {
          const Document& doc = corpus_.documents[item];
          ExtractDocumentPairs(doc, config_.window, train_pair);
          if (anchors) ForEachAnchorContext(doc, config_.window, train_anchor);
        } else {
          const int32_t e = -1 - item;
          for (int32_t o : graph_.incoming[e]) {
            train_pair({PairKind::kEntityEntity, e, o});
          }
        }
      }
    });
    for (int32_t w = 0; w < workers; ++w) {
      log.l_sg += l_sg[w];
      log.l_align += l_align[w];
    }
  }

  const TripleStore& train_;
  const Corpus& corpus_;
  const SupportSet& support_;
  const TrainConfig& config_;
  EmbeddingSpace space_;
  std::optional<OptimizerState> optimizer_;
  LinkGraph graph_;
  NoiseModels noises_;
  std::vector<int32_t> text_items_;
  int32_t num_kb_entities_;
};

}  // namespace

TrainResult Train(const TripleStore& train, const Corpus& corpus,
                  const SupportSet& support, const Vocabulary& vocab,
                  const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  config.Validate();
  CheckInputs(train, corpus, support, vocab);
  JointTrainer trainer(train, corpus, support, vocab, config);
  return trainer.Run(on_epoch);
}

}  // namespace kbtext
