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

#include "kbtext/vocabulary.h"

#include <fstream>
#include <sstream>

#include "kbtext/common.h"

namespace kbtext {

int32_t SymbolTable::Intern(std::string_view name) {
  auto [it, inserted] = ids_.try_emplace(std::string(name), size());
  if (inserted) {
    names_.emplace_back(name);
    freq_.push_back(0);
  }
  return it->second;
}

std::optional<int32_t> SymbolTable::Find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

void WriteSymbolTable(const std::filesystem::path& path,
                      const SymbolTable& table) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (int32_t i = 0; i < table.size(); ++i) {
    out << i << '\t' << table.Name(i) << '\t' << table.Frequency(i) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

SymbolTable ReadSymbolTable(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  SymbolTable table;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab1 = line.find('\t');
    auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected id, name, frequency");
    }
    int64_t id = 0;
    int64_t freq = 0;
    try {
      id = std::stoll(line.substr(0, tab1));
      freq = std::stoll(line.substr(tab2 + 1));
    } catch (const std::exception&) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": bad number");
    }
    if (id != table.size()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": ids must be dense and ascending");
    }
    int32_t got = table.Intern(line.substr(tab1 + 1, tab2 - tab1 - 1));
    if (got != id) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": duplicate name");
    }
    table.SetFrequency(got, freq);
  }
  return table;
}

namespace {
constexpr const char* kWordsFile = "vocab_words.tsv";
constexpr const char* kTextEntitiesFile = "vocab_text_entities.tsv";
constexpr const char* kKbEntitiesFile = "vocab_kb_entities.tsv";
constexpr const char* kRelationsFile = "vocab_relations.tsv";
}  // namespace

void WriteVocabulary(const std::filesystem::path& dir,
                     const Vocabulary& vocab) {
  WriteSymbolTable(dir / kWordsFile, vocab.words);
  WriteSymbolTable(dir / kTextEntitiesFile, vocab.text_entities);
  WriteSymbolTable(dir / kKbEntitiesFile, vocab.kb_entities);
  WriteSymbolTable(dir / kRelationsFile, vocab.relations);
}

Vocabulary ReadVocabulary(const std::filesystem::path& dir) {
  Vocabulary vocab;
  vocab.words = ReadSymbolTable(dir / kWordsFile);
  vocab.text_entities = ReadSymbolTable(dir / kTextEntitiesFile);
  vocab.kb_entities = ReadSymbolTable(dir / kKbEntitiesFile);
  vocab.relations = ReadSymbolTable(dir / kRelationsFile);
  return vocab;
}

}  // namespace kbtext
