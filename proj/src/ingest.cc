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

#include "kbtext/ingest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace kbtext {

namespace {

std::string Location(std::string_view source, int64_t line_no) {
  return std::string(source) + ":" + std::to_string(line_no);
}

void StripCarriageReturn(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const std::vector<int32_t> kEmpty;

}  // namespace

// ---------------------------------------------------------------------------
// TripleStore

TripleStore::TripleStore(std::span<const Triple> triples) {
  for (const Triple& x : triples) Add(x);
}

bool TripleStore::Add(const Triple& x) {
  if (!set_.insert(x).second) return false;
  auto id = static_cast<int32_t>(triples_.size());
  triples_.push_back(x);
  by_head_rel_[Key(x.h, x.r)].push_back(x.t);
  by_tail_rel_[Key(x.r, x.t)].push_back(x.h);
  by_entity_[x.h].push_back(id);
  if (x.t != x.h) by_entity_[x.t].push_back(id);
  return true;
}

std::span<const int32_t> TripleStore::Tails(int32_t h, int32_t r) const {
  auto it = by_head_rel_.find(Key(h, r));
  return it == by_head_rel_.end() ? std::span<const int32_t>(kEmpty)
                                  : std::span<const int32_t>(it->second);
}

std::span<const int32_t> TripleStore::Heads(int32_t r, int32_t t) const {
  auto it = by_tail_rel_.find(Key(r, t));
  return it == by_tail_rel_.end() ? std::span<const int32_t>(kEmpty)
                                  : std::span<const int32_t>(it->second);
}

std::span<const int32_t> TripleStore::Incident(int32_t e) const {
  auto it = by_entity_.find(e);
  return it == by_entity_.end() ? std::span<const int32_t>(kEmpty)
                                : std::span<const int32_t>(it->second);
}

bool TripleStore::IndexesConsistent() const {
  if (set_.size() != triples_.size()) return false;
  size_t head_entries = 0;
  size_t tail_entries = 0;
  size_t entity_entries = 0;
  for (const auto& [k, v] : by_head_rel_) head_entries += v.size();
  for (const auto& [k, v] : by_tail_rel_) tail_entries += v.size();
  for (const auto& [k, v] : by_entity_) entity_entries += v.size();
  size_t expected_entity_entries = 0;
  for (size_t i = 0; i < triples_.size(); ++i) {
    const Triple& x = triples_[i];
    if (!set_.contains(x)) return false;
    auto tails = Tails(x.h, x.r);
    auto heads = Heads(x.r, x.t);
    if (std::find(tails.begin(), tails.end(), x.t) == tails.end()) return false;
    if (std::find(heads.begin(), heads.end(), x.h) == heads.end()) return false;
    for (int32_t e : {x.h, x.t}) {
      auto inc = Incident(e);
      if (std::find(inc.begin(), inc.end(), static_cast<int32_t>(i)) ==
          inc.end()) {
        return false;
      }
    }
    expected_entity_entries += x.h == x.t ? 1 : 2;
  }
  return head_entries == triples_.size() && tail_entries == triples_.size() &&
         entity_entries == expected_entity_entries;
}

// ---------------------------------------------------------------------------
// Corpus and support set

size_t Corpus::TokenCount() const {
  size_t n = 0;
  for (const auto& doc : documents) n += doc.tokens.size();
  return n;
}

bool SupportSet::Add(int32_t kb_entity, int32_t text_entity) {
  if (kb_to_text_.contains(kb_entity) || text_to_kb_.contains(text_entity)) {
    return false;
  }
  kb_to_text_[kb_entity] = text_entity;
  text_to_kb_[text_entity] = kb_entity;
  pairs_.emplace_back(kb_entity, text_entity);
  return true;
}

int32_t SupportSet::TextOf(int32_t kb_entity) const {
  auto it = kb_to_text_.find(kb_entity);
  return it == kb_to_text_.end() ? -1 : it->second;
}

int32_t SupportSet::KbOf(int32_t text_entity) const {
  auto it = text_to_kb_.find(text_entity);
  return it == text_to_kb_.end() ? -1 : it->second;
}

// ---------------------------------------------------------------------------
// Triples file

TripleStore LoadTriples(const std::filesystem::path& path, Vocabulary& vocab,
                        VocabMode mode) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  TripleStore store;
  std::string line;
  int64_t line_no = 0;
  auto resolve = [&](SymbolTable& table, const std::string& name,
                     const char* what) {
    if (mode == VocabMode::kRegister) return table.Intern(name);
    auto id = table.Find(name);
    if (!id) {
      throw ParseError(Location(path.string(), line_no) + ": unknown " + what +
                       " '" + name + "'");
    }
    return *id;
  };
  while (std::getline(in, line)) {
    ++line_no;
    StripCarriageReturn(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
      size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3) {
      throw ParseError(Location(path.string(), line_no) + ": expected 3 fields, got " +
                       std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      if (f.empty()) {
        throw ParseError(Location(path.string(), line_no) + ": empty field");
      }
    }
    Triple x{resolve(vocab.kb_entities, fields[0], "entity"),
             resolve(vocab.relations, fields[1], "relation"),
             resolve(vocab.kb_entities, fields[2], "entity")};
    if (store.Add(x) && mode == VocabMode::kRegister) {
      vocab.kb_entities.AddFrequency(x.h, 1);
      vocab.kb_entities.AddFrequency(x.t, 1);
      vocab.relations.AddFrequency(x.r, 1);
    }
  }
  if (in.bad()) throw IoError("read failed: " + path.string());
  return store;
}

void WriteTriples(const std::filesystem::path& path,
                  std::span<const Triple> triples, const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const Triple& x : triples) {
    out << vocab.kb_entities.Name(x.h) << '\t' << vocab.relations.Name(x.r)
        << '\t' << vocab.kb_entities.Name(x.t) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Corpus file

namespace {

std::string Unescape(std::string_view token, std::string_view source,
                     int64_t line_no) {
  std::string out;
  out.reserve(token.size());
  for (size_t i = 0; i < token.size(); ++i) {
    char c = token[i];
    if (c != '\\') {
      out.push_back(c);
      continue;
    }
    if (i + 1 < token.size() && (token[i + 1] == '[' || token[i + 1] == '\\')) {
      out.push_back(token[++i]);
      continue;
    }
    throw ParseError(Location(source, line_no) + ": unknown escape in '" +
                     std::string(token) + "'");
  }
  return out;
}

std::string EscapeWord(std::string_view word) {
  std::string out;
  out.reserve(word.size());
  for (char c : word) {
    if (c == '\\' || c == '[') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

bool IsSpace(char c) { return c == ' ' || c == '\t'; }

}  // namespace

Corpus ParseCorpus(std::string_view text, Vocabulary& vocab, VocabMode mode,
                   std::string_view source_name) {
  Corpus corpus;
  bool open_document = false;
  int64_t line_no = 0;
  auto resolve = [&](SymbolTable& table, std::string_view name,
                     const char* what) {
    if (mode == VocabMode::kRegister) return table.Intern(name);
    auto id = table.Find(name);
    if (!id) {
      throw ParseError(Location(source_name, line_no) + ": unknown " + what +
                       " '" + std::string(name) + "'");
    }
    return *id;
  };

  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.starts_with("==") && (line.size() == 2 || IsSpace(line[2]))) {
      std::string_view name = line.substr(2);
      while (!name.empty() && IsSpace(name.front())) name.remove_prefix(1);
      while (!name.empty() && IsSpace(name.back())) name.remove_suffix(1);
      Document doc;
      if (!name.empty()) {
        doc.page_entity = resolve(vocab.text_entities, name, "entity");
      }
      corpus.documents.push_back(std::move(doc));
      open_document = true;
      continue;
    }

    size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && IsSpace(line[i])) ++i;
      if (i >= line.size()) break;
      size_t j = i;
      while (j < line.size() && !IsSpace(line[j])) ++j;
      std::string_view tok = line.substr(i, j - i);
      i = j;
      if (!open_document) {
        corpus.documents.emplace_back();
        open_document = true;
      }
      auto& tokens = corpus.documents.back().tokens;
      if (tok.starts_with("[[")) {
        if (tok.size() <= 4 || !tok.ends_with("]]")) {
          throw ParseError(Location(source_name, line_no) +
                           ": unterminated anchor '" + std::string(tok) + "'");
        }
        int32_t id = resolve(vocab.text_entities, tok.substr(2, tok.size() - 4),
                             "entity");
        if (mode == VocabMode::kRegister) vocab.text_entities.AddFrequency(id, 1);
        tokens.push_back(Token::Anchor(id));
      } else {
        std::string word = Unescape(tok, source_name, line_no);
        int32_t id = resolve(vocab.words, word, "word");
        if (mode == VocabMode::kRegister) vocab.words.AddFrequency(id, 1);
        tokens.push_back(Token::Word(id));
      }
    }
  }
  return corpus;
}

Corpus LoadCorpus(const std::filesystem::path& path, Vocabulary& vocab,
                  VocabMode mode) {
  return ParseCorpus(ReadFile(path), vocab, mode, path.string());
}

void WriteCorpus(const std::filesystem::path& path, const Corpus& corpus,
                 const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& doc : corpus.documents) {
    out << "==";
    if (doc.page_entity) out << ' ' << vocab.text_entities.Name(*doc.page_entity);
    out << '\n';
    if (doc.tokens.empty()) continue;
    bool first = true;
    for (const Token& tok : doc.tokens) {
      if (!first) out << ' ';
      first = false;
      if (tok.is_anchor()) {
        out << "[[" << vocab.text_entities.Name(tok.id) << "]]";
      } else {
        out << EscapeWord(vocab.words.Name(tok.id));
      }
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Filtering

FilterResult ApplyFrequencyFilters(const TripleStore& store,
                                   const Corpus& corpus,
                                   const Vocabulary& vocab,
                                   const FrequencyThresholds& thresholds) {
  if (thresholds.entity_min < 0 || thresholds.relation_min < 0 ||
      thresholds.word_min < 0) {
    throw ArgumentError("frequency thresholds must be >= 0");
  }
  FilterResult result;
  Vocabulary& out = result.vocab;

  auto filter_table = [](const SymbolTable& in, int64_t min_freq,
                         SymbolTable& dst) {
    std::vector<int32_t> remap(in.size(), -1);
    for (int32_t i = 0; i < in.size(); ++i) {
      if (in.Frequency(i) < min_freq) continue;
      remap[i] = dst.Intern(in.Name(i));
      dst.SetFrequency(remap[i], in.Frequency(i));
    }
    return remap;
  };
  auto entity_map = filter_table(vocab.kb_entities, thresholds.entity_min,
                                 out.kb_entities);
  auto relation_map = filter_table(vocab.relations, thresholds.relation_min,
                                   out.relations);

  for (const Triple& x : store.triples()) {
    int32_t h = entity_map[x.h];
    int32_t r = relation_map[x.r];
    int32_t t = entity_map[x.t];
    if (h < 0 || r < 0 || t < 0) continue;
    result.store.Add({h, r, t});
  }

  // The unknown word is always id 0 and is never filtered.
  const int32_t unk = out.words.Intern(Vocabulary::kUnknownWord);
  std::vector<int32_t> word_map(vocab.words.size(), unk);
  int64_t unk_freq = 0;
  for (int32_t i = 0; i < vocab.words.size(); ++i) {
    const std::string& name = vocab.words.Name(i);
    if (name == Vocabulary::kUnknownWord ||
        vocab.words.Frequency(i) < thresholds.word_min) {
      unk_freq += vocab.words.Frequency(i);
      continue;
    }
    word_map[i] = out.words.Intern(name);
    out.words.SetFrequency(word_map[i], vocab.words.Frequency(i));
  }
  out.words.SetFrequency(unk, unk_freq);

  out.text_entities = vocab.text_entities;

  result.corpus.documents.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) {
    Document d;
    d.page_entity = doc.page_entity;
    d.tokens.reserve(doc.tokens.size());
    for (const Token& tok : doc.tokens) {
      d.tokens.push_back(tok.is_anchor() ? tok : Token::Word(word_map[tok.id]));
    }
    result.corpus.documents.push_back(std::move(d));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Support set

SupportResult BuildSupportSet(
    const Vocabulary& vocab,
    std::span<const std::pair<std::string, std::string>> seed_pairs) {
  SupportResult result;
  for (const auto& [kb_name, text_name] : seed_pairs) {
    auto kb = vocab.kb_entities.Find(kb_name);
    auto text = vocab.text_entities.Find(text_name);
    if (!kb || !text) {
      ++result.unknown;
      continue;
    }
    if (!result.support.Add(*kb, *text)) ++result.conflicts;
  }
  return result;
}

SupportResult BuildSupportSet(const Vocabulary& vocab,
                              const std::filesystem::path& seed_map_path) {
  std::ifstream in(seed_map_path);
  if (!in) throw IoError("cannot read " + seed_map_path.string());
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    StripCarriageReturn(line);
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(Location(seed_map_path.string(), line_no) +
                       ": expected kb_entity<TAB>text_entity");
    }
    pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return BuildSupportSet(vocab, pairs);
}

void WriteSupportSet(const std::filesystem::path& path,
                     const SupportSet& support, const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [kb, text] : support.pairs()) {
    out << vocab.kb_entities.Name(kb) << '\t' << vocab.text_entities.Name(text)
        << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Few-shot split

FewShotSplit MakeFewShotSplit(const TripleStore& store,
                              const SupportSet& support, double fraction,
                              uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ArgumentError("few-shot fraction must lie in [0, 1]");
  }
  std::vector<int32_t> candidates;
  candidates.reserve(support.size());
  for (const auto& [kb, text] : support.pairs()) candidates.push_back(kb);
  std::sort(candidates.begin(), candidates.end());
  Rng rng(seed);
  Shuffle(candidates, rng);
  const auto n_select = static_cast<size_t>(
      std::floor(fraction * static_cast<double>(candidates.size()) + 0.5));
  candidates.resize(std::min(n_select, candidates.size()));

  const auto& triples = store.triples();
  std::vector<char> in_train(triples.size(), 1);
  std::vector<char> claimed(triples.size(), 0);
  FewShotSplit split;

  for (int32_t e : candidates) {
    std::vector<int32_t> incident;
    bool collides = false;
    for (int32_t id : store.Incident(e)) {
      if (!in_train[id]) continue;
      if (claimed[id]) collides = true;
      incident.push_back(id);
    }
    // An entity already inside a kept triple of an earlier few-shot entity
    // cannot be reduced to a single train triple without breaking that one.
    if (incident.empty() || collides) {
      ++split.dropped_entities;
      continue;
    }
    auto keep = *std::min_element(
        incident.begin(), incident.end(), [&](int32_t a, int32_t b) {
          return RelationMajorLess(triples[a], triples[b]);
        });
    claimed[keep] = 1;
    for (int32_t id : incident) {
      if (id == keep) continue;
      in_train[id] = 0;
      const Triple& x = triples[id];
      if (support.HasKb(x.h) && support.HasKb(x.t)) {
        split.test.push_back(x);
      } else {
        split.missing_support.push_back(x);
      }
    }
    split.fewshot_entities.push_back(e);
  }
  for (size_t i = 0; i < triples.size(); ++i) {
    if (in_train[i]) split.train.Add(triples[i]);
  }
  std::sort(split.fewshot_entities.begin(), split.fewshot_entities.end());
  return split;
}

TripleStore RestrictToSupport(const TripleStore& store,
                              const SupportSet& support) {
  TripleStore out;
  for (const Triple& x : store.triples()) {
    if (support.HasKb(x.h) && support.HasKb(x.t)) out.Add(x);
  }
  return out;
}

}  // namespace kbtext
