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

#include "kbtext/embedding.h"

#include <algorithm>
#include <cmath>

namespace kbtext {

std::string_view TableName(Table table) {
  switch (table) {
    case Table::kKbEntity: return "kb_entity";
    case Table::kRelation: return "relation";
    case Table::kWordIn: return "word_in";
    case Table::kWordOut: return "word_out";
    case Table::kEntityIn: return "entity_in";
    case Table::kEntityOut: return "entity_out";
    case Table::kProjW: return "projection_w";
    case Table::kProjB: return "projection_b";
  }
  return "unknown";
}

bool EmbeddingTable::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

EmbeddingSpace EmbeddingSpace::Materialized() const {
  EmbeddingSpace out = *this;
  out.entity_in_alias.clear();
  auto& entity_in = out.table(Table::kEntityIn);
  for (size_t i = 0; i < entity_in_alias.size(); ++i) {
    if (entity_in_alias[i] < 0) continue;
    auto src = table(Table::kKbEntity).Row(entity_in_alias[i]);
    std::copy(src.begin(), src.end(),
              entity_in.Row(static_cast<int32_t>(i)).begin());
  }
  return out;
}

bool EmbeddingSpace::AllFinite() const {
  return std::all_of(tables.begin(), tables.end(),
                     [](const EmbeddingTable& t) { return t.AllFinite(); });
}

ptrdiff_t GradBuffer::IndexOf(Table table, int32_t row) const {
  if (keys_.size() <= kLinearLimit) {
    for (size_t i = 0; i < keys_.size(); ++i) {
      if (keys_[i].table == table && keys_[i].row == row) {
        return static_cast<ptrdiff_t>(i);
      }
    }
    return -1;
  }
  auto it = index_.find(Pack(table, row));
  return it == index_.end() ? -1 : static_cast<ptrdiff_t>(it->second);
}

std::span<double> GradBuffer::At(Table table, int32_t row) {
  ptrdiff_t idx = IndexOf(table, row);
  if (idx < 0) {
    idx = static_cast<ptrdiff_t>(keys_.size());
    keys_.push_back({table, row});
    values_.resize(values_.size() + dim_, 0.0);
    if (keys_.size() > kLinearLimit) {
      if (index_.empty()) {
        for (size_t i = 0; i < keys_.size(); ++i) {
          index_[Pack(keys_[i].table, keys_[i].row)] = i;
        }
      } else {
        index_[Pack(table, row)] = static_cast<size_t>(idx);
      }
    }
  }
  return {values_.data() + static_cast<size_t>(idx) * dim_,
          static_cast<size_t>(dim_)};
}

std::span<const double> GradBuffer::Find(Table table, int32_t row) const {
  ptrdiff_t idx = IndexOf(table, row);
  if (idx < 0) return {};
  return grad(static_cast<size_t>(idx));
}

void GradBuffer::Clear() {
  keys_.clear();
  values_.clear();
  index_.clear();
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double LogSigmoid(double x) { return -Softplus(-x); }

}  // namespace kbtext
