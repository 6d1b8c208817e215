// Copyright 2026 The InvRat Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment plumbing: lambda grids, on-disk run directories, provenance and
// the end-to-end reproduction pipeline.
//
// A run directory holds
//
//   model.ckpt        trained parameters with the config embedded
//   trace.jsonl       one TraceLine per step
//   provenance.json   full config plus format versions
//
// and, once evaluated, metrics.json and report.html.

#ifndef INVRAT_PIPELINE_HPP_
#define INVRAT_PIPELINE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "invrat/corpus.hpp"
#include "invrat/datagen.hpp"
#include "invrat/eval.hpp"
#include "invrat/game.hpp"

namespace invrat {

inline constexpr char kVersion[] = "1.0.0";

// Game settings tuned for the generated corpora.
GameConfig BiasGameConfig();
GameConfig AspectGameConfig(const AspectConfig& aspect);

// "lambda_<value>", e.g. lambda_0, lambda_2.5.
std::string RunDirName(double lambda);

// JSON object: tool version, file format versions and the given sections.
std::string ProvenanceJson(const std::string& game_json, const Corpus& corpus);

struct TrainedRun {
  double lambda = 0.0;
  std::string dir;  // empty when nothing was written
  GameModel model;
  std::vector<TraceRecord> trace;
  std::optional<double> best_dev_acc;
  std::size_t best_step = 0;
};

// Trains one model per lambda from `base`, all with the same seed so every
// grid point starts from identical parameters. When `out_dir` is non-empty
// each run is written to out_dir/RunDirName(lambda).
std::vector<TrainedRun> TrainGrid(const Corpus& corpus, const GameConfig& base,
                                  const std::vector<double>& lambdas,
                                  const std::string& out_dir);

// Evaluates on `split` and, when run.dir is set, writes metrics.json and
// report.html next to the checkpoint.
Evaluation EvaluateRun(TrainedRun& run, const Corpus& corpus, Split split);

struct ComparisonRow {
  std::string corpus;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  std::optional<double> dev_acc;
  EvalReport test;
};

// Markdown table, one row per run.
std::string FormatComparisonTable(const std::vector<ComparisonRow>& rows);
std::string ComparisonJson(const std::vector<ComparisonRow>& rows);

struct ReproOptions {
  std::uint64_t seed = 1;
  std::vector<double> lambdas = {10.0, 30.0};  // lambda 0 is always added
  bool bias = true;
  bool aspect = true;
  std::size_t steps = 0;  // 0 keeps the tuned step counts
};

// Generates both corpora, trains lambda 0 and the grid on each, evaluates on
// the test split and writes out_dir/{bias,aspect}/..., comparison.md,
// comparison.json and provenance.json.
std::vector<ComparisonRow> RunRepro(const ReproOptions& options, const std::string& out_dir);

}  // namespace invrat

#endif  // INVRAT_PIPELINE_HPP_
