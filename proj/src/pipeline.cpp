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

#include "invrat/pipeline.hpp"

#include <cstdio>
#include <filesystem>

#include "invrat/checkpoint.hpp"
#include "invrat/error.hpp"
#include "invrat/io.hpp"
#include "json.hpp"

namespace invrat {
namespace {

using json = nlohmann::json;

std::string Join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::string Fixed(const std::optional<double>& v, int digits) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, *v);
  return buf;
}

}  // namespace

GameConfig BiasGameConfig() {
  GameConfig c;
  c.h_kind = HKind::kIdentity;
  c.constraint_mode = ConstraintMode::kSoft;
  c.alpha_sparsity = 0.15;
  c.mu1 = 1.0;
  c.steps = 3000;
  return c;
}

GameConfig AspectGameConfig(const AspectConfig& aspect) {
  GameConfig c;
  c.h_kind = HKind::kIdentity;
  c.constraint_mode = ConstraintMode::kHard;
  c.rationale_len = aspect.segment_len;
  c.steps = 3000;
  return c;
}

std::string RunDirName(double lambda) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "lambda_%g", lambda);
  return buf;
}

std::string ProvenanceJson(const std::string& game_json, const Corpus& corpus) {
  const json doc = {{"tool", "invrat"},
                    {"version", kVersion},
                    {"formats", {{"checkpoint", kCheckpointVersion}, {"corpus", 1}, {"trace", 1}}},
                    {"game", json::parse(game_json)},
                    {"corpus",
                     {{"kind", corpus.kind},
                      {"seq_len", corpus.seq_len},
                      {"num_envs", corpus.num_envs},
                      {"vocab_size", corpus.vocab.size()},
                      {"examples", corpus.examples.size()},
                      {"config", json::parse(corpus.config_json)}}}};
  return doc.dump(2) + "\n";
}

std::vector<TrainedRun> TrainGrid(const Corpus& corpus, const GameConfig& base,
                                  const std::vector<double>& lambdas,
                                  const std::string& out_dir) {
  if (lambdas.empty()) throw InvalidArgument("lambda grid is empty");
  std::vector<TrainedRun> runs;
  for (double lambda : lambdas) {
    GameConfig config = base;
    config.lambda_inv = lambda;
    config.Validate(corpus.seq_len);
    TrainedRun run{lambda, "",
                   GameModel(config, corpus.vocab.size(), corpus.seq_len, corpus.num_envs),
                   {}, std::nullopt, 0};
    GameTrainer trainer(run.model, corpus);
    run.trace = trainer.Run();
    run.best_dev_acc = trainer.best_dev_acc();
    run.best_step = trainer.best_step();
    if (!out_dir.empty()) {
      run.dir = Join(out_dir, RunDirName(lambda));
      std::string trace;
      for (const TraceRecord& r : run.trace) trace += TraceLine(r) + "\n";
      WriteFileAtomic(Join(run.dir, "trace.jsonl"), trace);
      SaveModel(Join(run.dir, "model.ckpt"), run.model);
      WriteFileAtomic(Join(run.dir, "provenance.json"),
                      ProvenanceJson(GameConfigToJson(config), corpus));
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

Evaluation EvaluateRun(TrainedRun& run, const Corpus& corpus, Split split) {
  Evaluation ev = Evaluate(run.model, corpus, split);
  if (!run.dir.empty()) {
    WriteFileAtomic(Join(run.dir, "metrics.json"), EvalReportJson(ev.report));
    WriteReportHtml(Join(run.dir, "report.html"), ev.report, corpus, ev.rows,
                    ev.prediction.masks);
  }
  return ev;
}

std::string FormatComparisonTable(const std::vector<ComparisonRow>& rows) {
  std::string t =
      "| corpus | seed | lambda | dev acc | test acc | bias rate | P | R | F1 | held-out gap |\n"
      "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const ComparisonRow& r : rows) {
    char lambda[32];
    std::snprintf(lambda, sizeof(lambda), "%g", r.lambda);
    t += "| " + r.corpus + " | " + std::to_string(r.seed) + " | " + lambda + " | " +
         Fixed(r.dev_acc, 4) + " | " + Fixed(r.test.accuracy, 4) + " | " +
         Fixed(r.test.bias_highlighted, 4) + " | " + Fixed(r.test.micro.precision, 4) + " | " +
         Fixed(r.test.micro.recall, 4) + " | " + Fixed(r.test.micro.f1, 4) + " | " +
         Fixed(r.test.invariance_gap, 4) + " |\n";
  }
  return t;
}

std::string ComparisonJson(const std::vector<ComparisonRow>& rows) {
  json out = json::array();
  for (const ComparisonRow& r : rows) {
    out.push_back({{"corpus", r.corpus},
                   {"seed", r.seed},
                   {"lambda", r.lambda},
                   {"dev_acc", r.dev_acc ? json(*r.dev_acc) : json(nullptr)},
                   {"test", json::parse(EvalReportJson(r.test))}});
  }
  return out.dump(2) + "\n";
}

std::vector<ComparisonRow> RunRepro(const ReproOptions& options, const std::string& out_dir) {
  if (out_dir.empty()) throw InvalidArgument("repro needs an output directory");
  if (!options.bias && !options.aspect) throw InvalidArgument("repro has nothing to run");
  std::vector<double> lambdas = {0.0};
  for (double l : options.lambdas) {
    if (l != 0.0) lambdas.push_back(l);
  }

  std::vector<ComparisonRow> rows;
  json provenance = {{"tool", "invrat"},
                     {"version", kVersion},
                     {"seed", options.seed},
                     {"lambdas", lambdas},
                     {"runs", json::object()}};
  auto run_corpus = [&](const std::string& name, const Corpus& corpus, GameConfig game) {
    game.seed = options.seed;
    if (options.steps > 0) game.steps = options.steps;
    const std::string dir = Join(out_dir, name);
    SaveCorpus(Join(dir, "corpus.jsonl"), corpus);
    std::vector<TrainedRun> runs = TrainGrid(corpus, game, lambdas, dir);
    for (TrainedRun& run : runs) {
      const Evaluation ev = EvaluateRun(run, corpus, Split::kTest);
      rows.push_back({name, options.seed, run.lambda, run.best_dev_acc, ev.report});
    }
    provenance["runs"][name] = json::parse(ProvenanceJson(GameConfigToJson(game), corpus));
  };

  if (options.bias) {
    BiasInjectionConfig bias;
    bias.seed = options.seed;
    run_corpus("bias", GenBiasCorpus(bias), BiasGameConfig());
  }
  if (options.aspect) {
    AspectConfig aspect;
    aspect.seed = options.seed;
    run_corpus("aspect", GenAspectCorpus(aspect), AspectGameConfig(aspect));
  }
  WriteFileAtomic(Join(out_dir, "comparison.md"), FormatComparisonTable(rows));
  WriteFileAtomic(Join(out_dir, "comparison.json"), ComparisonJson(rows));
  WriteFileAtomic(Join(out_dir, "provenance.json"), provenance.dump(2) + "\n");
  return rows;
}

}  // namespace invrat
