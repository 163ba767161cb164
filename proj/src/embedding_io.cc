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

#include "kbtext/embedding_io.h"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

#include "kbtext/common.h"

namespace kbtext {

namespace {

constexpr std::array<char, 8> kMagic = {'K', 'T', 'E', 'M', 'B', '1', '\0', '\0'};
constexpr const char* kManifest = "manifest.tsv";

static_assert(std::endian::native == std::endian::little,
              "embedding export assumes a little-endian host");

void PutU32(std::ostream& out, uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.write(buf, 4);
}

uint32_t GetU32(std::istream& in) {
  char buf[4];
  in.read(buf, 4);
  uint32_t v;
  std::memcpy(&v, buf, 4);
  return v;
}

}  // namespace

void WriteEmbeddingTable(const std::filesystem::path& path,
                         const EmbeddingTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  PutU32(out, static_cast<uint32_t>(table.rows()));
  PutU32(out, static_cast<uint32_t>(table.dim()));
  std::vector<float> buf(table.values().begin(), table.values().end());
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw IoError("write failed: " + path.string());
}

EmbeddingTable ReadEmbeddingTable(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) {
    throw ParseError(path.string() + ": bad embedding table header");
  }
  const uint32_t rows = GetU32(in);
  const uint32_t dim = GetU32(in);
  if (!in) throw ParseError(path.string() + ": truncated header");
  std::vector<float> buf(static_cast<size_t>(rows) * dim);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!in) throw ParseError(path.string() + ": truncated table");
  EmbeddingTable table(static_cast<int32_t>(rows), static_cast<int32_t>(dim));
  std::copy(buf.begin(), buf.end(), table.values().begin());
  return table;
}

void ExportEmbeddings(const std::filesystem::path& dir,
                      const EmbeddingSpace& space, const Vocabulary& vocab) {
  std::filesystem::create_directories(dir);
  const EmbeddingSpace flat = space.Materialized();
  std::ofstream manifest(dir / kManifest);
  if (!manifest) throw IoError("cannot write " + (dir / kManifest).string());
  for (int i = 0; i < kNumTables; ++i) {
    const auto t = static_cast<Table>(i);
    const std::string file = std::string(TableName(t)) + ".bin";
    WriteEmbeddingTable(dir / file, flat.table(t));
    manifest << "table\t" << TableName(t) << '\t' << file << '\n';
  }
  WriteVocabulary(dir, vocab);
  manifest << "vocab\twords\tvocab_words.tsv\n"
           << "vocab\ttext_entities\tvocab_text_entities.tsv\n"
           << "vocab\tkb_entities\tvocab_kb_entities.tsv\n"
           << "vocab\trelations\tvocab_relations.tsv\n"
           << "dim\t" << space.dim << '\n';
  if (!manifest) throw IoError("write failed: " + (dir / kManifest).string());
}

LoadedEmbeddings ImportEmbeddings(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / kManifest);
  if (!manifest) throw IoError("cannot read " + (dir / kManifest).string());
  std::map<std::string, std::string> files;
  std::string line;
  while (std::getline(manifest, line)) {
    std::istringstream fields(line);
    std::string kind, name, file;
    std::getline(fields, kind, '\t');
    std::getline(fields, name, '\t');
    std::getline(fields, file, '\t');
    if (kind == "table") files[name] = file;
  }
  LoadedEmbeddings out;
  for (int i = 0; i < kNumTables; ++i) {
    const auto t = static_cast<Table>(i);
    auto it = files.find(std::string(TableName(t)));
    if (it == files.end()) {
      throw ParseError("manifest lacks table " + std::string(TableName(t)));
    }
    out.space.table(t) = ReadEmbeddingTable(dir / it->second);
  }
  out.space.dim = out.space.table(Table::kProjW).dim();
  for (const auto& table : out.space.tables) {
    if (table.rows() > 0 && table.dim() != out.space.dim) {
      throw ParseError("embedding tables disagree on dim");
    }
  }
  out.vocab = ReadVocabulary(dir);
  return out;
}

void WriteTrainingLog(const std::filesystem::path& path,
                      std::span<const EpochLog> log) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch\tl_kb\tl_sg\tl_align\twall_seconds\n" << std::setprecision(10);
  for (const auto& e : log) {
    out << e.epoch << '\t' << e.l_kb << '\t' << e.l_sg << '\t' << e.l_align
        << '\t' << e.wall_seconds << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace kbtext
