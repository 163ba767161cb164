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

#include "kbtext/datagen.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_set>

#include "kbtext/common.h"

namespace kbtext {

namespace {

enum class RelationKind { kTranslation, kHub, kInverse };

// Every fifth relation points to a hub entity, every fifth reverses an
// earlier translation relation; the rest move a fixed offset in the latent
// space.
RelationKind KindOf(int32_t r) {
  switch (r % 5) {
    case 3:
      return RelationKind::kHub;
    case 4:
      return RelationKind::kInverse;
    default:
      return RelationKind::kTranslation;
  }
}

std::string KbName(int32_t i) { return "Q" + std::to_string(i); }
std::string TextName(int32_t i) { return "ent_" + std::to_string(i); }
std::string RelationName(int32_t r) { return "P" + std::to_string(r); }

struct LatentWorld {
  int32_t dim = 0;
  std::vector<double> z;

  std::span<const double> At(int32_t e) const {
    return {z.data() + static_cast<size_t>(e) * dim, static_cast<size_t>(dim)};
  }
};

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Closest entity in `pool` (other than `self`) to `target`; ties to the
// lowest id.
int32_t Nearest(const LatentWorld& w, std::span<const double> target,
                std::span<const int32_t> pool, int32_t self) {
  int32_t best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int32_t e : pool) {
    if (e == self) continue;
    const double d = SquaredDistance(w.At(e), target);
    if (d < best_d) {
      best_d = d;
      best = e;
    }
  }
  return best;
}

std::vector<Triple> GenerateFacts(const WorldConfig& config,
                                  const LatentWorld& w, Rng& rng) {
  const int32_t n = config.n_entities;
  std::vector<int32_t> everyone(n);
  for (int32_t i = 0; i < n; ++i) everyone[i] = i;

  std::vector<Triple> facts;
  std::vector<std::vector<Triple>> by_relation(config.n_relations);
  for (int32_t r = 0; r < config.n_relations; ++r) {
    auto& out = by_relation[r];
    switch (KindOf(r)) {
      case RelationKind::kTranslation: {
        const double domain = 0.3 + 0.3 * UniformReal(rng);
        std::vector<double> offset(w.dim);
        for (double& o : offset) o = 0.7 * UniformReal(rng) - 0.35;
        std::vector<double> target(w.dim);
        for (int32_t h = 0; h < n; ++h) {
          if (UniformReal(rng) >= domain) continue;
          auto zh = w.At(h);
          for (int32_t j = 0; j < w.dim; ++j) target[j] = zh[j] + offset[j];
          const int32_t t = Nearest(w, target, everyone, h);
          if (t >= 0) out.push_back({h, r, t});
        }
        break;
      }
      case RelationKind::kHub: {
        const int32_t n_hubs = std::max(2, n / 50);
        std::vector<int32_t> hubs = everyone;
        Shuffle(hubs, rng);
        hubs.resize(std::min<size_t>(hubs.size(), n_hubs));
        std::sort(hubs.begin(), hubs.end());
        for (int32_t h = 0; h < n; ++h) {
          if (UniformReal(rng) >= 0.5) continue;
          const int32_t t = Nearest(w, w.At(h), hubs, h);
          if (t >= 0) out.push_back({h, r, t});
        }
        break;
      }
      case RelationKind::kInverse: {
        for (const Triple& x : by_relation[r - 2]) {
          if (UniformReal(rng) < 0.5) out.push_back({x.t, r, x.h});
        }
        break;
      }
    }
    facts.insert(facts.end(), out.begin(), out.end());
  }
  std::sort(facts.begin(), facts.end(), RelationMajorLess);
  facts.erase(std::unique(facts.begin(), facts.end()), facts.end());
  return facts;
}

bool HasManyToOneRelation(std::span<const Triple> facts) {
  std::map<int32_t, std::unordered_set<int32_t>> heads;
  std::map<int32_t, int64_t> count;
  for (const Triple& x : facts) {
    heads[x.r].insert(x.h);
    ++count[x.r];
  }
  for (const auto& [r, c] : count) {
    if (c >= 2 && static_cast<double>(c) / heads[r].size() <= 1.2) return true;
  }
  return false;
}

std::string DescriptionWord(const WorldConfig& config, const LatentWorld& w,
                            int32_t e, Rng& rng) {
  const int32_t j = static_cast<int32_t>(UniformIndex(rng, w.dim));
  int32_t bin = std::min(config.feature_bins - 1,
                         static_cast<int32_t>(w.At(e)[j] * config.feature_bins));
  if (UniformReal(rng) < config.description_noise) {
    bin = static_cast<int32_t>(UniformIndex(rng, config.feature_bins));
  }
  return "a" + std::to_string(j) + "_" + std::to_string(bin);
}

std::string RenderCorpus(const WorldConfig& config, const LatentWorld& w,
                         std::span<const Triple> facts,
                         const std::vector<bool>& covered, Rng& rng) {
  // Description words per sentence; each sentence opens with the page
  // entity's anchor.
  constexpr int32_t kSentenceLength = 6;
  std::vector<std::vector<const Triple*>> stated(config.n_entities);
  for (const Triple& x : facts) {
    if (covered[x.h] && covered[x.t]) stated[x.h].push_back(&x);
  }
  std::ostringstream out;
  for (int32_t e = 0; e < config.n_entities; ++e) {
    if (!covered[e]) continue;
    std::vector<std::string> segments;
    for (int32_t i = 0; i < config.doc_length; i += kSentenceLength) {
      std::string s = "[[" + TextName(e) + "]]";
      for (int32_t k = i; k < std::min(config.doc_length, i + kSentenceLength);
           ++k) {
        s += ' ' + DescriptionWord(config, w, e, rng);
      }
      segments.push_back(std::move(s));
    }
    for (const Triple* x : stated[e]) {
      const std::string rel = "r" + std::to_string(x->r);
      segments.push_back("[[" + TextName(x->h) + "]] " + rel + "_x " + rel +
                         "_y [[" + TextName(x->t) + "]]");
    }
    Shuffle(segments, rng);
    out << "== " << TextName(e) << '\n';
    for (const auto& s : segments) out << s << '\n';
  }
  return out.str();
}

}  // namespace

void WorldConfig::Validate() const {
  auto ratio = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ArgumentError(std::string(name) + " must be in [0, 1]");
    }
  };
  ratio(kb_density, "kb_density");
  ratio(text_coverage, "text_coverage");
  ratio(withheld_fraction, "withheld_fraction");
  ratio(description_noise, "description_noise");
  if (n_entities < 1 || n_relations < 1 || doc_length < 1 || latent_dim < 1 ||
      feature_bins < 1) {
    throw ArgumentError("world counts must be >= 1");
  }
}

World GenerateWorld(const WorldConfig& config) {
  config.Validate();
  LatentWorld latent;
  latent.dim = config.latent_dim;
  {
    Rng rng(DeriveSeed(config.seed, "world-latent"));
    latent.z.resize(static_cast<size_t>(config.n_entities) * latent.dim);
    for (double& v : latent.z) v = UniformReal(rng);
  }
  Rng fact_rng(DeriveSeed(config.seed, "world-facts"));
  const std::vector<Triple> facts = GenerateFacts(config, latent, fact_rng);
  if (facts.empty() || !HasManyToOneRelation(facts)) {
    throw GenerationError(
        "world has no one-to-one or many-to-one relation; increase "
        "n_entities or n_relations");
  }

  std::vector<bool> covered(config.n_entities, false);
  {
    Rng rng(DeriveSeed(config.seed, "world-coverage"));
    std::vector<int32_t> order(config.n_entities);
    for (int32_t i = 0; i < config.n_entities; ++i) order[i] = i;
    Shuffle(order, rng);
    const auto n_covered = static_cast<size_t>(
        std::llround(config.text_coverage * config.n_entities));
    for (size_t i = 0; i < n_covered; ++i) covered[order[i]] = true;
  }

  std::vector<bool> withheld(facts.size(), false);
  {
    std::vector<size_t> eligible;
    for (size_t i = 0; i < facts.size(); ++i) {
      if (covered[facts[i].h] && covered[facts[i].t]) eligible.push_back(i);
    }
    const auto want = static_cast<size_t>(
        std::llround(config.withheld_fraction * facts.size()));
    if (want > eligible.size()) {
      throw GenerationError("only " + std::to_string(eligible.size()) +
                            " facts have both entities covered by text; " +
                            std::to_string(want) + " must be withheld");
    }
    Rng rng(DeriveSeed(config.seed, "world-withheld"));
    Shuffle(eligible, rng);
    for (size_t i = 0; i < want; ++i) withheld[eligible[i]] = true;
  }

  World world;
  {
    Rng rng(DeriveSeed(config.seed, "world-kb"));
    for (size_t i = 0; i < facts.size(); ++i) {
      if (withheld[i] || UniformReal(rng) >= config.kb_density) continue;
      const Triple& f = facts[i];
      Triple x{world.vocab.kb_entities.Intern(KbName(f.h)),
               world.vocab.relations.Intern(RelationName(f.r)),
               world.vocab.kb_entities.Intern(KbName(f.t))};
      if (world.store.Add(x)) {
        world.vocab.kb_entities.AddFrequency(x.h, 1);
        world.vocab.kb_entities.AddFrequency(x.t, 1);
        world.vocab.relations.AddFrequency(x.r, 1);
      }
    }
  }
  {
    Rng rng(DeriveSeed(config.seed, "world-text"));
    world.corpus = ParseCorpus(RenderCorpus(config, latent, facts, covered, rng),
                               world.vocab, VocabMode::kRegister, "<world>");
  }
  std::vector<std::pair<std::string, std::string>> seed_pairs;
  for (int32_t e = 0; e < config.n_entities; ++e) {
    if (covered[e]) seed_pairs.emplace_back(KbName(e), TextName(e));
  }
  world.support = BuildSupportSet(world.vocab, seed_pairs).support;

  auto to_ids = [&](const Triple& f) -> std::optional<Triple> {
    auto h = world.vocab.kb_entities.Find(KbName(f.h));
    auto r = world.vocab.relations.Find(RelationName(f.r));
    auto t = world.vocab.kb_entities.Find(KbName(f.t));
    if (!h || !r || !t) return std::nullopt;
    return Triple{*h, *r, *t};
  };
  for (size_t i = 0; i < facts.size(); ++i) {
    auto x = to_ids(facts[i]);
    if (!x) continue;
    world.facts.push_back(*x);
    if (withheld[i] && world.support.HasKb(x->h) && world.support.HasKb(x->t)) {
      world.withheld.push_back(*x);
    }
  }
  std::sort(world.facts.begin(), world.facts.end(), RelationMajorLess);
  std::sort(world.withheld.begin(), world.withheld.end(), RelationMajorLess);
  return world;
}

void WriteWorld(const std::filesystem::path& dir, const World& world) {
  std::filesystem::create_directories(dir);
  WriteTriples(dir / "triples.tsv", world.store.triples(), world.vocab);
  WriteCorpus(dir / "corpus.txt", world.corpus, world.vocab);
  WriteSupportSet(dir / "seed_map.tsv", world.support, world.vocab);
  WriteTriples(dir / "withheld.tsv", world.withheld, world.vocab);
}

}  // namespace kbtext
