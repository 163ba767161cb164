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

#ifndef KBTEXT_EMBEDDING_H_
#define KBTEXT_EMBEDDING_H_

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace kbtext {

// Parameter tables of the joint model. kProjW is a dim x dim matrix stored
// row-major (one row per output coordinate); kProjB is a single row.
enum class Table : uint8_t {
  kKbEntity,
  kRelation,
  kWordIn,
  kWordOut,
  kEntityIn,
  kEntityOut,
  kProjW,
  kProjB,
};
inline constexpr int kNumTables = 8;

std::string_view TableName(Table table);

// True for tables owned by the KB model (optimized with Adagrad).
inline bool IsKbTable(Table t) {
  return t == Table::kKbEntity || t == Table::kRelation ||
         t == Table::kProjW || t == Table::kProjB;
}

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(int32_t rows, int32_t dim, double fill = 0.0)
      : rows_(rows), dim_(dim),
        values_(static_cast<size_t>(rows) * dim, fill) {}

  int32_t rows() const { return rows_; }
  int32_t dim() const { return dim_; }

  std::span<double> Row(int32_t r) {
    return {values_.data() + static_cast<size_t>(r) * dim_,
            static_cast<size_t>(dim_)};
  }
  std::span<const double> Row(int32_t r) const {
    return {values_.data() + static_cast<size_t>(r) * dim_,
            static_cast<size_t>(dim_)};
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool AllFinite() const;
  bool operator==(const EmbeddingTable&) const = default;

 private:
  int32_t rows_ = 0;
  int32_t dim_ = 0;
  std::vector<double> values_;
};

// All parameter tables. When `entity_in_alias` is non-empty, text entity
// input row i is stored in KB entity row entity_in_alias[i] whenever that
// value is >= 0 (shared-embedding alignment).
struct EmbeddingSpace {
  int32_t dim = 0;
  std::array<EmbeddingTable, kNumTables> tables;
  std::vector<int32_t> entity_in_alias;

  EmbeddingTable& table(Table t) { return tables[static_cast<int>(t)]; }
  const EmbeddingTable& table(Table t) const {
    return tables[static_cast<int>(t)];
  }

  // Storage cell of a logical row.
  std::pair<Table, int32_t> Resolve(Table t, int32_t row) const {
    if (t == Table::kEntityIn && !entity_in_alias.empty() &&
        entity_in_alias[row] >= 0) {
      return {Table::kKbEntity, entity_in_alias[row]};
    }
    return {t, row};
  }

  std::span<double> Row(Table t, int32_t row) {
    auto [st, sr] = Resolve(t, row);
    return table(st).Row(sr);
  }
  std::span<const double> Row(Table t, int32_t row) const {
    auto [st, sr] = Resolve(t, row);
    return table(st).Row(sr);
  }

  // Copy of the space with every aliased row written out explicitly and the
  // alias removed.
  EmbeddingSpace Materialized() const;

  bool AllFinite() const;
};

// Sparse gradient accumulator keyed by logical (table, row). Entries are
// zero-initialized on first access and accumulate thereafter.
class GradBuffer {
 public:
  struct Key {
    Table table;
    int32_t row;
    bool operator==(const Key&) const = default;
  };

  explicit GradBuffer(int32_t dim) : dim_(dim) {}

  std::span<double> At(Table table, int32_t row);
  // Empty span if the row has no entry.
  std::span<const double> Find(Table table, int32_t row) const;

  size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }
  const Key& key(size_t i) const { return keys_[i]; }
  std::span<const double> grad(size_t i) const {
    return {values_.data() + i * dim_, static_cast<size_t>(dim_)};
  }
  int32_t dim() const { return dim_; }

  void Clear();

 private:
  static uint64_t Pack(Table t, int32_t row) {
    return (static_cast<uint64_t>(t) << 32) | static_cast<uint32_t>(row);
  }
  ptrdiff_t IndexOf(Table table, int32_t row) const;

  static constexpr size_t kLinearLimit = 16;

  int32_t dim_;
  std::vector<Key> keys_;
  std::vector<double> values_;
  std::unordered_map<uint64_t, size_t> index_;
};

double Dot(std::span<const double> a, std::span<const double> b);

// log(1 + exp(x)) without overflow.
double Softplus(double x);
double Sigmoid(double x);
// log(sigmoid(x)), stable for large |x|.
double LogSigmoid(double x);

}  // namespace kbtext

#endif  // KBTEXT_EMBEDDING_H_
