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

#ifndef KBTEXT_INGEST_H_
#define KBTEXT_INGEST_H_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kbtext/common.h"
#include "kbtext/vocabulary.h"

namespace kbtext {

struct Triple {
  int32_t h = 0;
  int32_t r = 0;
  int32_t t = 0;

  auto operator<=>(const Triple&) const = default;
};

// Ordering used to pick the triple a few-shot entity keeps: (r, h, t).
inline bool RelationMajorLess(const Triple& a, const Triple& b) {
  if (a.r != b.r) return a.r < b.r;
  if (a.h != b.h) return a.h < b.h;
  return a.t < b.t;
}

struct TripleHash {
  size_t operator()(const Triple& x) const {
    uint64_t k = static_cast<uint64_t>(static_cast<uint32_t>(x.h));
    k = SplitMix64(k ^ (static_cast<uint64_t>(static_cast<uint32_t>(x.r)) << 32));
    return SplitMix64(k ^ static_cast<uint32_t>(x.t));
  }
};

// A deduplicated set of triples with lookup indexes. Insertion order of the
// first occurrence is preserved.
class TripleStore {
 public:
  TripleStore() = default;
  explicit TripleStore(std::span<const Triple> triples);

  // Returns false if the triple was already present.
  bool Add(const Triple& triple);
  bool Contains(const Triple& triple) const { return set_.contains(triple); }

  const std::vector<Triple>& triples() const { return triples_; }
  size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }

  // Tails t with (h, r, t) in the store.
  std::span<const int32_t> Tails(int32_t h, int32_t r) const;
  // Heads h with (h, r, t) in the store.
  std::span<const int32_t> Heads(int32_t r, int32_t t) const;
  // Indices into triples() of every triple with `e` as head or tail. A
  // self-loop is listed once.
  std::span<const int32_t> Incident(int32_t e) const;

  bool operator==(const TripleStore& other) const {
    return triples_ == other.triples_;
  }

  // Checks that the indexes agree exactly with the triple list.
  bool IndexesConsistent() const;

 private:
  static uint64_t Key(int32_t a, int32_t b) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
           static_cast<uint32_t>(b);
  }

  std::vector<Triple> triples_;
  std::unordered_set<Triple, TripleHash> set_;
  std::unordered_map<uint64_t, std::vector<int32_t>> by_head_rel_;
  std::unordered_map<uint64_t, std::vector<int32_t>> by_tail_rel_;
  std::unordered_map<int32_t, std::vector<int32_t>> by_entity_;
};

struct Token {
  enum class Kind : uint8_t { kWord, kAnchor };
  Kind kind = Kind::kWord;
  int32_t id = 0;

  static Token Word(int32_t id) { return {Kind::kWord, id}; }
  static Token Anchor(int32_t id) { return {Kind::kAnchor, id}; }
  bool is_anchor() const { return kind == Kind::kAnchor; }
  bool operator==(const Token&) const = default;
};

struct Document {
  std::optional<int32_t> page_entity;
  std::vector<Token> tokens;

  bool operator==(const Document&) const = default;
};

struct Corpus {
  std::vector<Document> documents;

  size_t TokenCount() const;
  bool operator==(const Corpus&) const = default;
};

// Bijection between a subset of KB entities and a subset of text entities.
class SupportSet {
 public:
  // Adds the pair unless either side is already mapped. Returns whether the
  // pair was added.
  bool Add(int32_t kb_entity, int32_t text_entity);

  const std::vector<std::pair<int32_t, int32_t>>& pairs() const {
    return pairs_;
  }
  size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

  // -1 when unmapped.
  int32_t TextOf(int32_t kb_entity) const;
  int32_t KbOf(int32_t text_entity) const;
  bool HasKb(int32_t kb_entity) const { return TextOf(kb_entity) >= 0; }
  bool HasText(int32_t text_entity) const { return KbOf(text_entity) >= 0; }

 private:
  std::vector<std::pair<int32_t, int32_t>> pairs_;
  std::unordered_map<int32_t, int32_t> kb_to_text_;
  std::unordered_map<int32_t, int32_t> text_to_kb_;
};

struct FewShotSplit {
  TripleStore train;
  std::vector<Triple> test;
  // Sorted ascending.
  std::vector<int32_t> fewshot_entities;
  // Removed incident triples of few-shot entities with an endpoint outside
  // the support set. Not part of train or test.
  std::vector<Triple> missing_support;
  // Selected entities dropped because every usable triple was claimed.
  int32_t dropped_entities = 0;
};

enum class VocabMode {
  // Unknown symbols are registered and frequencies are counted.
  kRegister,
  // Unknown symbols are a parse error; frequencies are left untouched.
  kFrozen,
};

// Triples file: one `head<TAB>relation<TAB>tail` per line, `#` at column 0
// starts a comment. Duplicates are dropped.
TripleStore LoadTriples(const std::filesystem::path& path, Vocabulary& vocab,
                        VocabMode mode = VocabMode::kRegister);
void WriteTriples(const std::filesystem::path& path,
                  std::span<const Triple> triples, const Vocabulary& vocab);

// Corpus file: `== <entity>` starts a document owned by that page entity (a
// bare `==` starts one without a page); other lines are whitespace separated
// tokens; `[[X]]` is an anchor to text entity X; a word starting with `[[` is
// written `\[\[...`, and a literal backslash as `\\`.
Corpus LoadCorpus(const std::filesystem::path& path, Vocabulary& vocab,
                  VocabMode mode = VocabMode::kRegister);
Corpus ParseCorpus(std::string_view text, Vocabulary& vocab,
                   VocabMode mode = VocabMode::kRegister,
                   std::string_view source_name = "<corpus>");
void WriteCorpus(const std::filesystem::path& path, const Corpus& corpus,
                 const Vocabulary& vocab);

struct FrequencyThresholds {
  int64_t entity_min = 0;
  int64_t relation_min = 0;
  int64_t word_min = 0;
};

struct FilterResult {
  TripleStore store;
  Corpus corpus;
  Vocabulary vocab;
};

// Single pass: KB entities and relations below their thresholds are removed
// together with their triples; rare words collapse into the reserved unknown
// word (id 0 of the new vocabulary); text entities are kept. Frequencies are
// carried over from `vocab`, so filtering twice is a no-op.
FilterResult ApplyFrequencyFilters(const TripleStore& store,
                                   const Corpus& corpus,
                                   const Vocabulary& vocab,
                                   const FrequencyThresholds& thresholds);

struct SupportResult {
  SupportSet support;
  // Pairs dropped because one side was already mapped.
  int32_t conflicts = 0;
  // Pairs dropped because a side is absent from the vocabulary.
  int32_t unknown = 0;
};

// Seed map file: `kb_entity<TAB>text_entity` per line.
SupportResult BuildSupportSet(const Vocabulary& vocab,
                              const std::filesystem::path& seed_map_path);
SupportResult BuildSupportSet(
    const Vocabulary& vocab,
    std::span<const std::pair<std::string, std::string>> seed_pairs);
void WriteSupportSet(const std::filesystem::path& path,
                     const SupportSet& support, const Vocabulary& vocab);

FewShotSplit MakeFewShotSplit(const TripleStore& store,
                              const SupportSet& support, double fraction,
                              uint64_t seed);

// Triples whose head and tail both belong to the support set.
TripleStore RestrictToSupport(const TripleStore& store,
                              const SupportSet& support);

}  // namespace kbtext

#endif  // KBTEXT_INGEST_H_
