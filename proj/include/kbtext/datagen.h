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

#ifndef KBTEXT_DATAGEN_H_
#define KBTEXT_DATAGEN_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "kbtext/ingest.h"
#include "kbtext/vocabulary.h"

namespace kbtext {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WorldConfig {
  int32_t n_entities = 1000;
  int32_t n_relations = 20;
  // Fraction of the non-withheld true facts emitted as KB triples.
  double kb_density = 0.9;
  // Fraction of entities with a text page (and a seed-map entry).
  double text_coverage = 0.6;
  // Fraction of all true facts that are stated only in text.
  double withheld_fraction = 0.1;
  // Description words per page.
  int32_t doc_length = 120;
  uint64_t seed = 0;

  // Dimension of the hidden attribute space the relations are defined on.
  int32_t latent_dim = 4;
  // Bins per attribute; each (attribute, bin) pair is one description word.
  int32_t feature_bins = 6;
  // Probability that a description word names a random bin.
  double description_noise = 0.5;

  void Validate() const;
};

struct World {
  Vocabulary vocab;
  TripleStore store;
  Corpus corpus;
  SupportSet support;
  // True facts absent from `store` whose sentences are in the corpus.
  std::vector<Triple> withheld;
  // True facts whose entities and relation have KB ids, relation-major
  // sorted.
  std::vector<Triple> facts;
};

// KB entities are named Q<i> and relations P<r>; the text entity of Q<i> is
// ent_<i>. Vocabulary frequencies match what loading the written files gives.
World GenerateWorld(const WorldConfig& config);

// triples.tsv, corpus.txt, seed_map.tsv and withheld.tsv in the ingest
// formats.
void WriteWorld(const std::filesystem::path& dir, const World& world);

}  // namespace kbtext

#endif  // KBTEXT_DATAGEN_H_
