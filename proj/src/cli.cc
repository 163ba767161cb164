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

#include "kbtext/cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <span>
#include <sstream>
#include <vector>

#include "kbtext/common.h"
#include "kbtext/datagen.h"
#include "kbtext/embedding_io.h"
#include "kbtext/eval.h"
#include "kbtext/ingest.h"
#include "kbtext/trainer.h"

namespace kbtext {

namespace {

namespace fs = std::filesystem;

class MismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  WorldConfig world;
  TrainConfig train;
  FrequencyThresholds thresholds;
  double fewshot_fraction = 0.2;
  std::string align_method = "none";
  std::string corruption = "both";
  std::string training_set = "full";
  bool serial = false;
  std::string task = "lp";
  int32_t candidates = 1000;
  int32_t analogy_relations = 10;
  int32_t analogy_examples = 100;
  int32_t analogy_candidates = 1000;
  std::string lambdas = "1e-4,1e-3,1e-2,1e-1,1,1e1";
  uint64_t seed = 0;

  std::string triples;
  std::string corpus;
  std::string seed_map;
  std::string data;
  std::string embeddings;
  std::string out;
};

// Preprocessed dataset directory layout.
constexpr const char* kTrainFile = "train.tsv";
constexpr const char* kTestFile = "test.tsv";
constexpr const char* kCorpusFile = "corpus.txt";
constexpr const char* kSupportFile = "support.tsv";

void RequireExists(const std::string& path) {
  if (path.empty()) throw IoError("missing required path argument");
  if (!fs::exists(path)) throw IoError("input not found: " + path);
}

void WriteRunConfig(const fs::path& path, const CLI::App& app) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << app.config_to_str(true, false);
}

std::vector<double> ParseLambdaList(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !(v >= 0.0)) {
      throw ArgumentError("bad lambda value '" + item + "'");
    }
    out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Corruption ParseCorruption(const std::string& name) {
  if (name == "head") return Corruption::kHead;
  if (name == "tail") return Corruption::kTail;
  if (name == "both") return Corruption::kBoth;
  throw ArgumentError("unknown corruption mode '" + name + "'");
}

// Finalizes the training section of `cfg` from its string-valued flags.
TrainConfig ResolveTrainConfig(const RunConfig& cfg) {
  TrainConfig train = cfg.train;
  train.align.method = ParseAlignMethod(cfg.align_method);
  train.kbe.corruption = ParseCorruption(cfg.corruption);
  train.serial_deterministic = cfg.serial || train.threads == 1;
  if (cfg.serial && train.threads != 1) {
    throw ArgumentError("--serial cannot be combined with --threads > 1");
  }
  train.seed = DeriveSeed(cfg.seed, "train");
  train.Validate();
  return train;
}

struct Dataset {
  Vocabulary vocab;
  TripleStore train;
  TripleStore test;
  Corpus corpus;
  SupportSet support;
};

Dataset LoadDataset(const fs::path& dir, bool with_corpus) {
  RequireExists(dir.string());
  for (const char* f : {kTrainFile, kTestFile, kSupportFile}) {
    RequireExists((dir / f).string());
  }
  Dataset d;
  d.vocab = ReadVocabulary(dir);
  d.train = LoadTriples(dir / kTrainFile, d.vocab, VocabMode::kFrozen);
  d.test = LoadTriples(dir / kTestFile, d.vocab, VocabMode::kFrozen);
  if (with_corpus) {
    RequireExists((dir / kCorpusFile).string());
    d.corpus = LoadCorpus(dir / kCorpusFile, d.vocab, VocabMode::kFrozen);
  }
  d.support = BuildSupportSet(d.vocab, dir / kSupportFile).support;
  return d;
}

TrainResult TrainOn(const Dataset& d, const RunConfig& cfg,
                    const TrainConfig& train, std::ostream& out) {
  if (cfg.training_set != "full" && cfg.training_set != "support") {
    throw ArgumentError("training-set must be 'full' or 'support'");
  }
  const TripleStore triples = cfg.training_set == "support"
                                  ? RestrictToSupport(d.train, d.support)
                                  : d.train;
  return Train(triples, d.corpus, d.support, d.vocab, train,
               [&](const EpochLog& log) {
                 out << "epoch " << log.epoch << " l_kb " << log.l_kb
                     << " l_sg " << log.l_sg << " l_align " << log.l_align
                     << '\n';
               });
}

EvalReport Evaluate(const std::string& task, const Dataset& d,
                    const EmbeddingSpace& space, const RunConfig& cfg) {
  if (task == "lp") {
    LinkPredictionOptions opts;
    opts.candidate_limit = cfg.candidates;
    opts.seed = DeriveSeed(cfg.seed, "eval-lp");
    return LinkPredictionEval(d.test.triples(), d.train, space, opts);
  }
  if (task == "analogy") {
    auto relations = SelectAnalogyRelations(d.train, cfg.analogy_relations);
    auto examples =
        BuildAnalogySet(d.train, d.test.triples(), d.support, relations,
                        cfg.analogy_examples, DeriveSeed(cfg.seed, "analogy-set"));
    AnalogyCandidateSampler sampler(d.support, d.train);
    AnalogyOptions opts;
    opts.candidate_size = cfg.analogy_candidates;
    opts.seed = DeriveSeed(cfg.seed, "eval-analogy");
    return AnalogyEval(examples, space, sampler, opts);
  }
  throw ArgumentError("unknown task '" + task + "' (expected lp or analogy)");
}

void CheckSameSymbols(const SymbolTable& a, const SymbolTable& b,
                      const char* what) {
  if (a.names() != b.names()) {
    throw MismatchError(std::string("embedding vocabulary does not match the "
                                    "dataset: ") +
                        what + " differ");
  }
}

void WriteManifest(const fs::path& path,
                   const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [k, v] : kv) out << k << '\t' << v << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

// Shortest text that reads back to the same double.
std::string Num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

int CmdGenerate(const RunConfig& cfg, const CLI::App& app, std::ostream& out) {
  WorldConfig wc = cfg.world;
  wc.seed = cfg.seed;
  const World world = GenerateWorld(wc);
  WriteWorld(cfg.out, world);
  WriteRunConfig(fs::path(cfg.out) / "run.cfg", app);
  out << "generated " << world.store.size() << " triples, "
      << world.corpus.documents.size() << " documents, "
      << world.support.size() << " seed pairs, " << world.withheld.size()
      << " withheld facts\n";
  return kExitOk;
}

int CmdPreprocess(const RunConfig& cfg, const CLI::App& app,
                  std::ostream& out) {
  RequireExists(cfg.triples);
  RequireExists(cfg.corpus);
  RequireExists(cfg.seed_map);
  Vocabulary raw;
  const TripleStore store = LoadTriples(cfg.triples, raw);
  const Corpus corpus = LoadCorpus(cfg.corpus, raw);
  const FilterResult filtered =
      ApplyFrequencyFilters(store, corpus, raw, cfg.thresholds);
  const SupportResult support =
      BuildSupportSet(filtered.vocab, fs::path(cfg.seed_map));
  const FewShotSplit split =
      MakeFewShotSplit(filtered.store, support.support, cfg.fewshot_fraction,
                       DeriveSeed(cfg.seed, "fewshot-split"));

  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  WriteVocabulary(dir, filtered.vocab);
  WriteTriples(dir / "triples.tsv", filtered.store.triples(), filtered.vocab);
  WriteTriples(dir / kTrainFile, split.train.triples(), filtered.vocab);
  WriteTriples(dir / kTestFile, split.test, filtered.vocab);
  WriteTriples(dir / "missing_support.tsv", split.missing_support,
               filtered.vocab);
  WriteCorpus(dir / kCorpusFile, filtered.corpus, filtered.vocab);
  WriteSupportSet(dir / kSupportFile, support.support, filtered.vocab);
  {
    std::ofstream f(dir / "fewshot_entities.txt");
    for (int32_t e : split.fewshot_entities) {
      f << filtered.vocab.kb_entities.Name(e) << '\n';
    }
    if (!f) throw IoError("write failed: fewshot_entities.txt");
  }
  WriteManifest(dir / "manifest.tsv",
                {{"entity_min", std::to_string(cfg.thresholds.entity_min)},
                 {"relation_min", std::to_string(cfg.thresholds.relation_min)},
                 {"word_min", std::to_string(cfg.thresholds.word_min)},
                 {"fewshot_fraction", Num(cfg.fewshot_fraction)},
                 {"seed", std::to_string(cfg.seed)},
                 {"triples", std::to_string(filtered.store.size())},
                 {"train", std::to_string(split.train.size())},
                 {"test", std::to_string(split.test.size())},
                 {"missing_support", std::to_string(split.missing_support.size())},
                 {"fewshot_entities", std::to_string(split.fewshot_entities.size())},
                 {"dropped_fewshot_entities", std::to_string(split.dropped_entities)},
                 {"support_pairs", std::to_string(support.support.size())},
                 {"support_conflicts", std::to_string(support.conflicts)},
                 {"support_unknown", std::to_string(support.unknown)}});
  WriteRunConfig(dir / "run.cfg", app);
  out << "kept " << filtered.store.size() << " triples; train "
      << split.train.size() << ", test " << split.test.size() << ", "
      << split.fewshot_entities.size() << " few-shot entities\n";
  return kExitOk;
}

int CmdTrain(const RunConfig& cfg, const CLI::App& app, std::ostream& out) {
  const TrainConfig train = ResolveTrainConfig(cfg);
  const Dataset d = LoadDataset(cfg.data, true);
  const TrainResult result = TrainOn(d, cfg, train, out);
  const fs::path dir(cfg.out);
  ExportEmbeddings(dir, result.space, d.vocab);
  WriteTrainingLog(dir / "training_log.tsv", result.log);
  WriteRunConfig(dir / "run.cfg", app);
  return kExitOk;
}

int CmdEval(const RunConfig& cfg, const CLI::App& app, std::ostream& out) {
  RequireExists(cfg.embeddings);
  const Dataset d = LoadDataset(cfg.data, false);
  const LoadedEmbeddings emb = ImportEmbeddings(cfg.embeddings);
  CheckSameSymbols(emb.vocab.kb_entities, d.vocab.kb_entities, "KB entities");
  CheckSameSymbols(emb.vocab.relations, d.vocab.relations, "relations");
  CheckSameSymbols(emb.vocab.text_entities, d.vocab.text_entities,
                   "text entities");
  const EvalReport report = Evaluate(cfg.task, d, emb.space, cfg);
  const fs::path path(cfg.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  WriteReport(path, report, d.vocab.relations);
  WriteRunConfig(fs::path(path.string() + ".cfg"), app);
  out << cfg.task << " macro: MR " << report.macro.mr << " Hits@1 "
      << report.macro.hits1 << " Hits@10 " << report.macro.hits10 << " over "
      << report.macro.n << " queries\n";
  return kExitOk;
}

int CmdSweep(const RunConfig& cfg, const CLI::App& app, std::ostream& out) {
  const std::vector<double> lambdas = ParseLambdaList(cfg.lambdas);
  const TrainConfig base = ResolveTrainConfig(cfg);
  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  std::ofstream agg(dir / "sweep.tsv");
  if (!agg) throw IoError("cannot write " + (dir / "sweep.tsv").string());
  agg << "lambda\ttask\tn\tmr\thits1\thits10\n" << std::setprecision(10);
  if (!lambdas.empty()) {
    const Dataset d = LoadDataset(cfg.data, true);
    for (double lambda : lambdas) {
      TrainConfig train = base;
      train.align.lambda = lambda;
      out << "lambda " << lambda << '\n';
      const TrainResult result = TrainOn(d, cfg, train, out);
      for (const char* task : {"lp", "analogy"}) {
        const EvalReport r = Evaluate(task, d, result.space, cfg);
        agg << Num(lambda) << '\t' << task << '\t' << r.macro.n << '\t'
            << r.macro.mr << '\t' << r.macro.hits1 << '\t' << r.macro.hits10
            << '\n';
      }
    }
  }
  if (!agg) throw IoError("write failed: " + (dir / "sweep.tsv").string());
  WriteRunConfig(dir / "run.cfg", app);
  return kExitOk;
}

void AddSeed(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
}

void AddTrainOptions(CLI::App* sub, RunConfig& cfg) {
  auto& t = cfg.train;
  sub->add_option("--data", cfg.data, "Preprocessed dataset directory")
      ->required();
  sub->add_option("--align-method", cfg.align_method,
                  "none, same_embedding, projection, entity_name or anchors")
      ->capture_default_str();
  sub->add_option("--lambda", t.align.lambda, "Alignment weight")
      ->capture_default_str();
  sub->add_option("--epochs", t.epochs)->capture_default_str();
  sub->add_option("--dim", t.dim)->capture_default_str();
  sub->add_option("--lr-kbe", t.lr_kbe)->capture_default_str();
  sub->add_option("--lr-sg", t.lr_sg)->capture_default_str();
  sub->add_option("--gamma", t.kbe.gamma)->capture_default_str();
  sub->add_option("--neg-per-pos", t.kbe.neg_per_pos)->capture_default_str();
  sub->add_option("--corruption", cfg.corruption, "head, tail or both")
      ->capture_default_str();
  sub->add_option("--window", t.window)->capture_default_str();
  sub->add_option("--negatives", t.k_neg_sg, "Skip-gram negatives per pair")
      ->capture_default_str();
  sub->add_option("--noise-power", t.noise_power)->capture_default_str();
  sub->add_option("--threads", t.threads, "Hogwild worker threads")
      ->capture_default_str();
  sub->add_flag("--serial", cfg.serial,
                "Single worker, bitwise reproducible");
  sub->add_option("--training-set", cfg.training_set,
                  "full, or support to keep only triples inside the support "
                  "set")
      ->capture_default_str();
  AddSeed(sub, cfg);
}

void AddEvalOptions(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--candidates", cfg.candidates,
                  "Link prediction candidate limit")
      ->capture_default_str();
  sub->add_option("--analogy-relations", cfg.analogy_relations)
      ->capture_default_str();
  sub->add_option("--analogy-examples", cfg.analogy_examples,
                  "Examples per relation")
      ->capture_default_str();
  sub->add_option("--analogy-candidates", cfg.analogy_candidates)
      ->capture_default_str();
}

CLI::App* AddCommand(CLI::App& app, const std::string& name,
                     const std::string& help, std::string& config_path) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", config_path,
                  "key=value file of flag defaults; command-line flags win");
  return sub;
}

bool HasFlag(std::span<const std::string> args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.starts_with(flag + "=");
  });
}

// CLI11 does not read config files for subcommands, so the file named by
// --config is turned into --key=value arguments for every key that the
// command line does not already set. Unknown keys then fail as unknown
// flags.
std::vector<std::string> ExpandConfigFile(std::span<const std::string> args) {
  std::vector<std::string> out(args.begin(), args.end());
  std::string path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
    }
  }
  if (path.empty()) return out;
  RequireExists(path);
  CLI::ConfigINI format;
  for (const CLI::ConfigItem& item : format.from_file(path)) {
    if (!item.parents.empty()) {
      throw ArgumentError(path + ": sections are not supported (" +
                          item.fullname() + ")");
    }
    if (item.name == "config") continue;
    const std::string flag = "--" + item.name;
    if (HasFlag(args, flag)) continue;
    std::string value;
    for (const auto& v : item.inputs) value += (value.empty() ? "" : ",") + v;
    out.push_back(flag + "=" + value);
  }
  return out;
}

int Guarded(std::ostream& err, const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const MismatchError& e) {
    err << "error: " << e.what() << '\n';
    return kExitMismatch;
  } catch (const DivergenceError& e) {
    err << "error: training diverged: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace

int RunCli(std::span<const std::string> args, std::ostream& out,
           std::ostream& err) {
  RunConfig cfg;
  std::string config_path;
  CLI::App app("Joint knowledge-base and text embedding toolkit", "kbtext");
  app.require_subcommand(1, 1);

  auto* gen = AddCommand(app, "generate", "Write a synthetic world", config_path);
  gen->add_option("--out", cfg.out, "Output directory")->required();
  gen->add_option("--n-entities", cfg.world.n_entities)->capture_default_str();
  gen->add_option("--n-relations", cfg.world.n_relations)
      ->capture_default_str();
  gen->add_option("--kb-density", cfg.world.kb_density)->capture_default_str();
  gen->add_option("--text-coverage", cfg.world.text_coverage)
      ->capture_default_str();
  gen->add_option("--withheld-fraction", cfg.world.withheld_fraction)
      ->capture_default_str();
  gen->add_option("--doc-length", cfg.world.doc_length)->capture_default_str();
  gen->add_option("--description-noise", cfg.world.description_noise)
      ->capture_default_str();
  AddSeed(gen, cfg);

  auto* pre = AddCommand(app, "preprocess",
                         "Filter, build the support set and few-shot split",
                         config_path);
  pre->add_option("--triples", cfg.triples, "Triples TSV")->required();
  pre->add_option("--corpus", cfg.corpus, "Anchored corpus")->required();
  pre->add_option("--seed-map", cfg.seed_map, "KB/text entity pairs TSV")
      ->required();
  pre->add_option("--out", cfg.out, "Output directory")->required();
  pre->add_option("--entity-min", cfg.thresholds.entity_min)
      ->capture_default_str();
  pre->add_option("--relation-min", cfg.thresholds.relation_min)
      ->capture_default_str();
  pre->add_option("--word-min", cfg.thresholds.word_min)->capture_default_str();
  pre->add_option("--fewshot-fraction", cfg.fewshot_fraction)
      ->capture_default_str();
  AddSeed(pre, cfg);

  auto* train = AddCommand(app, "train", "Train embeddings and export them",
                           config_path);
  AddTrainOptions(train, cfg);
  train->add_option("--out", cfg.out, "Export directory")->required();

  auto* eval = AddCommand(app, "eval", "Evaluate exported embeddings", config_path);
  eval->add_option("--task", cfg.task, "lp or analogy")->capture_default_str();
  eval->add_option("--embeddings", cfg.embeddings, "Export directory")
      ->required();
  eval->add_option("--data", cfg.data, "Preprocessed dataset directory")
      ->required();
  eval->add_option("--out", cfg.out, "Report TSV")->required();
  AddEvalOptions(eval, cfg);
  AddSeed(eval, cfg);

  auto* sweep = AddCommand(app, "sweep", "Train and evaluate per lambda",
                           config_path);
  AddTrainOptions(sweep, cfg);
  AddEvalOptions(sweep, cfg);
  sweep->add_option("--lambdas", cfg.lambdas, "Comma-separated lambda list")
      ->capture_default_str();
  sweep->add_option("--out", cfg.out, "Output directory")->required();

  std::vector<std::string> expanded;
  if (const int code = Guarded(err, [&] {
        expanded = ExpandConfigFile(args);
        return kExitOk;
      });
      code != kExitOk) {
    return code;
  }
  std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  return Guarded(err, [&] {
    if (gen->parsed()) return CmdGenerate(cfg, *gen, out);
    if (pre->parsed()) return CmdPreprocess(cfg, *pre, out);
    if (train->parsed()) return CmdTrain(cfg, *train, out);
    if (eval->parsed()) return CmdEval(cfg, *eval, out);
    return CmdSweep(cfg, *sweep, out);
  });
}

}  // namespace kbtext
