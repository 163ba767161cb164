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

#include "kbtext/eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "kbtext/kbe.h"

namespace kbtext {

CandidatePools::CandidatePools(const TripleStore& train, int32_t num_entities)
    : num_entities_(num_entities) {
  for (const Triple& x : train.triples()) {
    pools_[{x.r, static_cast<int>(Slot::kHead)}].push_back(x.h);
    pools_[{x.r, static_cast<int>(Slot::kTail)}].push_back(x.t);
  }
  for (auto& [key, v] : pools_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
}

std::span<const int32_t> CandidatePools::Pool(int32_t relation,
                                              Slot slot) const {
  auto it = pools_.find({relation, static_cast<int>(slot)});
  if (it == pools_.end()) return {};
  return it->second;
}

namespace {

// `limit` distinct members of `pool` (or all of it), by partial Fisher-Yates.
std::vector<int32_t> SampleWithoutReplacement(std::vector<int32_t> pool,
                                              int32_t limit, Rng& rng) {
  if (static_cast<int64_t>(pool.size()) <= limit) return pool;
  for (int32_t i = 0; i < limit; ++i) {
    std::swap(pool[i], pool[i + UniformIndex(rng, pool.size() - i)]);
  }
  pool.resize(limit);
  return pool;
}

}  // namespace

CandidateSet BuildCandidateSet(int32_t relation, Slot slot,
                               const CandidatePools& pools, int32_t limit,
                               Rng& rng) {
  if (limit < 1) throw ArgumentError("candidate limit must be >= 1");
  CandidateSet out;
  out.relation = relation;
  out.slot = slot;
  auto pool = pools.Pool(relation, slot);
  if (!pool.empty()) {
    out.entities = SampleWithoutReplacement({pool.begin(), pool.end()}, limit,
                                            rng);
    return out;
  }
  out.fallback = true;
  std::vector<int32_t> all(pools.num_entities());
  std::iota(all.begin(), all.end(), 0);
  out.entities = SampleWithoutReplacement(std::move(all), limit, rng);
  return out;
}

CandidateSet BuildCandidateSet(int32_t relation, Slot slot,
                               const TripleStore& train, int32_t num_entities,
                               int32_t limit, Rng& rng) {
  return BuildCandidateSet(relation, slot, CandidatePools(train, num_entities),
                           limit, rng);
}

int64_t FilteredRank(const Triple& test, Slot slot,
                     std::span<const int32_t> candidates,
                     const EmbeddingSpace& space,
                     const TripleSet* known_positives) {
  auto distance = [&](const Triple& x) {
    return TransEDistance(space.Row(Table::kKbEntity, x.h),
                          space.Row(Table::kRelation, x.r),
                          space.Row(Table::kKbEntity, x.t));
  };
  const double truth = distance(test);
  const int32_t true_entity = slot == Slot::kHead ? test.h : test.t;
  int64_t better = 0;
  for (int32_t c : candidates) {
    if (c == true_entity) continue;
    Triple x = test;
    (slot == Slot::kHead ? x.h : x.t) = c;
    if (known_positives != nullptr && known_positives->contains(x)) continue;
    if (distance(x) < truth) ++better;
  }
  return better + 1;
}

EvalReport AggregateRanks(std::span<const RankedQuery> ranks) {
  struct Acc {
    double sum_rank = 0;
    int64_t hits1 = 0;
    int64_t hits10 = 0;
    int64_t n = 0;
  };
  std::map<int32_t, Acc> acc;
  for (const auto& q : ranks) {
    auto& a = acc[q.relation];
    a.sum_rank += static_cast<double>(q.rank);
    a.hits1 += q.rank <= 1;
    a.hits10 += q.rank <= 10;
    ++a.n;
  }
  EvalReport report;
  for (const auto& [rel, a] : acc) {
    const double n = static_cast<double>(a.n);
    Metrics m{a.sum_rank / n, a.hits1 / n, a.hits10 / n, a.n};
    report.per_relation[rel] = m;
    report.macro.mr += m.mr;
    report.macro.hits1 += m.hits1;
    report.macro.hits10 += m.hits10;
    report.macro.n += a.n;
  }
  if (!report.per_relation.empty()) {
    const double k = static_cast<double>(report.per_relation.size());
    report.macro.mr /= k;
    report.macro.hits1 /= k;
    report.macro.hits10 /= k;
  }
  return report;
}

EvalReport LinkPredictionEval(std::span<const Triple> test,
                              const TripleStore& train,
                              const EmbeddingSpace& space,
                              const LinkPredictionOptions& options) {
  const int32_t num_entities = space.table(Table::kKbEntity).rows();
  CandidatePools pools(train, num_entities);
  TripleSet positives(train.triples().begin(), train.triples().end());
  positives.insert(test.begin(), test.end());
  std::vector<RankedQuery> ranks;
  ranks.reserve(test.size() * 2);
  for (size_t i = 0; i < test.size(); ++i) {
    for (Slot slot : {Slot::kHead, Slot::kTail}) {
      Rng rng(DeriveSeed(options.seed, "lp-query",
                         2 * i + (slot == Slot::kTail ? 1 : 0)));
      auto candidates = BuildCandidateSet(test[i].r, slot, pools,
                                          options.candidate_limit, rng);
      ranks.push_back({test[i].r, FilteredRank(test[i], slot,
                                               candidates.entities, space,
                                               &positives)});
    }
  }
  return AggregateRanks(ranks);
}

// ---------------------------------------------------------------------------
// Analogical reasoning

std::vector<int32_t> SelectAnalogyRelations(const TripleStore& train,
                                            int32_t n_rel) {
  if (n_rel < 1) throw ArgumentError("n_rel must be >= 1");
  std::map<int32_t, std::unordered_set<int32_t>> heads;
  std::map<int32_t, int64_t> count;
  for (const Triple& x : train.triples()) {
    heads[x.r].insert(x.h);
    ++count[x.r];
  }
  std::vector<std::pair<int64_t, int32_t>> eligible;
  for (const auto& [rel, n] : count) {
    const double tails_per_head =
        static_cast<double>(n) / static_cast<double>(heads[rel].size());
    if (tails_per_head <= kManyToOneThreshold) eligible.emplace_back(n, rel);
  }
  std::sort(eligible.begin(), eligible.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<int32_t> out;
  for (size_t i = 0; i < eligible.size() && i < static_cast<size_t>(n_rel);
       ++i) {
    out.push_back(eligible[i].second);
  }
  return out;
}

std::vector<AnalogyExample> BuildAnalogySet(const TripleStore& train,
                                            std::span<const Triple> test,
                                            const SupportSet& support,
                                            std::span<const int32_t> relations,
                                            int32_t n_examples,
                                            uint64_t seed) {
  auto supported = [&](const Triple& x) {
    return support.HasKb(x.h) && support.HasKb(x.t);
  };
  std::vector<AnalogyExample> out;
  for (int32_t rel : relations) {
    std::vector<Triple> first;
    std::vector<Triple> second;
    for (const Triple& x : train.triples()) {
      if (x.r == rel && supported(x)) first.push_back(x);
    }
    for (const Triple& x : test) {
      if (x.r == rel && supported(x)) second.push_back(x);
    }
    if (first.empty() || second.empty() || n_examples <= 0) continue;
    Rng rng(DeriveSeed(seed, "analogy-set", static_cast<uint64_t>(rel)));
    auto make = [&](size_t i, size_t j) {
      return AnalogyExample{support.TextOf(first[i].h),
                            support.TextOf(first[i].t),
                            support.TextOf(second[j].h),
                            support.TextOf(second[j].t), rel};
    };
    const uint64_t combos = static_cast<uint64_t>(first.size()) * second.size();
    std::vector<AnalogyExample> chosen;
    if (combos <= 4'000'000) {
      std::vector<uint64_t> valid;
      for (size_t i = 0; i < first.size(); ++i) {
        for (size_t j = 0; j < second.size(); ++j) {
          if (first[i].h != second[j].h) valid.push_back(i * second.size() + j);
        }
      }
      Shuffle(valid, rng);
      if (valid.size() > static_cast<size_t>(n_examples)) {
        valid.resize(n_examples);
      }
      for (uint64_t v : valid) {
        chosen.push_back(make(v / second.size(), v % second.size()));
      }
    } else {
      std::unordered_set<uint64_t> seen;
      const int64_t max_attempts = 50LL * n_examples;
      for (int64_t a = 0; a < max_attempts &&
                          chosen.size() < static_cast<size_t>(n_examples);
           ++a) {
        const uint64_t v = UniformIndex(rng, combos);
        const size_t i = v / second.size();
        const size_t j = v % second.size();
        if (first[i].h == second[j].h || !seen.insert(v).second) continue;
        chosen.push_back(make(i, j));
      }
    }
    out.insert(out.end(), chosen.begin(), chosen.end());
  }
  return out;
}

AnalogyCandidateSampler::AnalogyCandidateSampler(const SupportSet& support,
                                                 const TripleStore& train) {
  for (const auto& [kb, text] : support.pairs()) {
    pool_.emplace_back(text, static_cast<int64_t>(train.Incident(kb).size()));
  }
  std::sort(pool_.begin(), pool_.end());
}

int64_t AnalogyCandidateSampler::Degree(int32_t text_entity) const {
  auto it = std::lower_bound(
      pool_.begin(), pool_.end(), std::make_pair(text_entity, int64_t{0}),
      [](const auto& a, const auto& b) { return a.first < b.first; });
  return it != pool_.end() && it->first == text_entity ? it->second : 0;
}

std::vector<int32_t> AnalogyCandidateSampler::Sample(
    int32_t size, Rng& rng, const std::unordered_set<int32_t>& exclude) const {
  if (size < 1) throw ArgumentError("candidate size must be >= 1");
  // Efraimidis-Spirakis keys: log(u) / w, largest keys win. Zero-degree
  // entities only fill up an otherwise exhausted pool.
  std::vector<std::pair<double, int32_t>> keyed;
  keyed.reserve(pool_.size());
  for (const auto& [entity, degree] : pool_) {
    if (exclude.contains(entity)) continue;
    double u = UniformReal(rng);
    double key = degree > 0 ? std::log(u > 0 ? u : 0x1.0p-60) / degree
                            : -std::numeric_limits<double>::infinity();
    keyed.emplace_back(key, entity);
  }
  const size_t take = std::min<size_t>(size, keyed.size());
  std::partial_sort(keyed.begin(), keyed.begin() + take, keyed.end(),
                    [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first > b.first
                                                : a.second < b.second;
                    });
  std::vector<int32_t> out;
  out.reserve(take);
  for (size_t i = 0; i < take; ++i) out.push_back(keyed[i].second);
  return out;
}

int64_t AnalogyRank(const AnalogyExample& ex, const EmbeddingSpace& space,
                    std::span<const int32_t> candidates) {
  const int32_t dim = space.dim;
  auto h1 = space.Row(Table::kEntityIn, ex.h1);
  auto t1 = space.Row(Table::kEntityIn, ex.t1);
  auto h2 = space.Row(Table::kEntityIn, ex.h2);
  std::vector<double> query(dim);
  for (int32_t i = 0; i < dim; ++i) query[i] = h2[i] + t1[i] - h1[i];
  const double qnorm = std::sqrt(Dot(query, query));
  auto cosine = [&](int32_t e) {
    auto v = space.Row(Table::kEntityIn, e);
    const double vnorm = std::sqrt(Dot(v, v));
    if (qnorm == 0.0 || vnorm == 0.0) return 0.0;
    return Dot(query, v) / (qnorm * vnorm);
  };
  const double truth = cosine(ex.t2);
  int64_t better = 0;
  for (int32_t c : candidates) {
    if (c != ex.t2 && cosine(c) > truth) ++better;
  }
  return better + 1;
}

EvalReport AnalogyEval(std::span<const AnalogyExample> examples,
                       const EmbeddingSpace& space,
                       const AnalogyCandidateSampler& sampler,
                       const AnalogyOptions& options) {
  std::vector<RankedQuery> ranks;
  ranks.reserve(examples.size());
  for (size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    Rng rng(DeriveSeed(options.seed, "analogy-query", i));
    auto candidates =
        sampler.Sample(options.candidate_size, rng, {ex.h1, ex.h2, ex.t1});
    ranks.push_back({ex.relation, AnalogyRank(ex, space, candidates)});
  }
  return AggregateRanks(ranks);
}

void WriteReport(const std::filesystem::path& path, const EvalReport& report,
                 const SymbolTable& relations) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "relation\tn\tmr\thits1\thits10\n" << std::setprecision(10);
  auto row = [&](const std::string& name, const Metrics& m) {
    out << name << '\t' << m.n << '\t' << m.mr << '\t' << m.hits1 << '\t'
        << m.hits10 << '\n';
  };
  for (const auto& [rel, m] : report.per_relation) {
    row(relations.Contains(rel) ? relations.Name(rel) : std::to_string(rel), m);
  }
  row("__macro__", report.macro);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace kbtext
