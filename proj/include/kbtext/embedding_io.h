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

#ifndef KBTEXT_EMBEDDING_IO_H_
#define KBTEXT_EMBEDDING_IO_H_

#include <filesystem>
#include <span>

#include "kbtext/embedding.h"
#include "kbtext/trainer.h"
#include "kbtext/vocabulary.h"

namespace kbtext {

// Binary table file: 8-byte magic "KTEMB1\0\0", u32 rows, u32 dim (little
// endian), then rows * dim little-endian float32 values, row-major.
void WriteEmbeddingTable(const std::filesystem::path& path,
                         const EmbeddingTable& table);
EmbeddingTable ReadEmbeddingTable(const std::filesystem::path& path);

// Writes one <table>.bin per table (aliased rows written out), the
// vocabulary TSVs and manifest.tsv listing both.
void ExportEmbeddings(const std::filesystem::path& dir,
                      const EmbeddingSpace& space, const Vocabulary& vocab);

struct LoadedEmbeddings {
  EmbeddingSpace space;
  Vocabulary vocab;
};

LoadedEmbeddings ImportEmbeddings(const std::filesystem::path& dir);

// Training log TSV with a header row: epoch, l_kb, l_sg, l_align,
// wall_seconds.
void WriteTrainingLog(const std::filesystem::path& path,
                      std::span<const EpochLog> log);

}  // namespace kbtext

#endif  // KBTEXT_EMBEDDING_IO_H_
