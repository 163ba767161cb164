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

#ifndef KBTEXT_VOCABULARY_H_
#define KBTEXT_VOCABULARY_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kbtext {

// Dense string <-> id mapping with a frequency per id. Ids are assigned in
// insertion order starting at 0.
class SymbolTable {
 public:
  // Returns the id of `name`, registering it if new.
  int32_t Intern(std::string_view name);
  std::optional<int32_t> Find(std::string_view name) const;

  const std::string& Name(int32_t id) const { return names_[id]; }
  int64_t Frequency(int32_t id) const { return freq_[id]; }
  void AddFrequency(int32_t id, int64_t n) { freq_[id] += n; }
  void SetFrequency(int32_t id, int64_t n) { freq_[id] = n; }

  int32_t size() const { return static_cast<int32_t>(names_.size()); }
  bool empty() const { return names_.empty(); }
  bool Contains(int32_t id) const { return id >= 0 && id < size(); }

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<int64_t>& frequencies() const { return freq_; }

  bool operator==(const SymbolTable& other) const {
    return names_ == other.names_ && freq_ == other.freq_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<int64_t> freq_;
  std::unordered_map<std::string, int32_t> ids_;
};

// The four symbol namespaces. Frequencies are raw counts from the loaded
// data: triple incidence for KB entities, triple count for relations, token
// count for words and anchor count for text entities.
struct Vocabulary {
  static constexpr std::string_view kUnknownWord = "<unk>";

  SymbolTable words;
  SymbolTable text_entities;
  SymbolTable kb_entities;
  SymbolTable relations;

  bool operator==(const Vocabulary& other) const = default;
};

// Vocabulary files are TSV: id, name, frequency. One file per namespace.
void WriteSymbolTable(const std::filesystem::path& path,
                      const SymbolTable& table);
SymbolTable ReadSymbolTable(const std::filesystem::path& path);

void WriteVocabulary(const std::filesystem::path& dir, const Vocabulary& vocab);
Vocabulary ReadVocabulary(const std::filesystem::path& dir);

}  // namespace kbtext

#endif  // KBTEXT_VOCABULARY_H_
