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

// invrat: oracle checks, corpus generation, training, evaluation and the
// end-to-end reproduction pipeline. Everything goes through the C API.
//
// Exit codes: 0 success, 1 other failure, 2 configuration error, 3 fixture
// failure, 4 training divergence, 5 I/O failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "invrat/invrat.h"
#include "json.hpp"

namespace {

using json = nlohmann::json;

enum ExitCode {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitFixture = 3,
  kExitDiverged = 4,
  kExitIo = 5,
};

// Carries a failed C API status up to main().
struct ApiFailure {
  invrat_status status;
};

int ExitFor(invrat_status status) {
  switch (status) {
    case INVRAT_OK: return kExitOk;
    case INVRAT_INVALID_ARGUMENT:
    case INVRAT_PARSE_ERROR: return kExitConfig;
    case INVRAT_FIXTURE_FAILED: return kExitFixture;
    case INVRAT_DIVERGED: return kExitDiverged;
    case INVRAT_IO_ERROR: return kExitIo;
    default: return kExitOther;
  }
}

void Report(invrat_status status) {
  std::cerr << "invrat: " << invrat_status_name(status) << ": " << invrat_last_error();
  if (status == INVRAT_PARSE_ERROR && invrat_last_error_line() > 0) {
    std::cerr << " (line " << invrat_last_error_line() << ")";
  }
  std::cerr << "\n";
  if (status == INVRAT_DIVERGED) {
    long step = 0;
    double li = 0.0, le = 0.0;
    invrat_last_divergence(&step, &li, &le);
    std::cerr << "invrat: diverged at step " << step << ", last L_i " << li << ", last L_e "
              << le << "\n";
  }
}

void Check(invrat_status status) {
  if (status != INVRAT_OK) throw ApiFailure{status};
}

// Owns a string returned by the library.
struct Owned {
  char* p = nullptr;
  ~Owned() { invrat_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct CorpusDeleter {
  void operator()(invrat_corpus* c) const { invrat_corpus_free(c); }
};
struct ModelDeleter {
  void operator()(invrat_model* m) const { invrat_model_free(m); }
};
using CorpusPtr = std::unique_ptr<invrat_corpus, CorpusDeleter>;
using ModelPtr = std::unique_ptr<invrat_model, ModelDeleter>;

CorpusPtr LoadCorpus(const std::string& path) {
  invrat_corpus* c = nullptr;
  Check(invrat_corpus_load(path.c_str(), &c));
  return CorpusPtr(c);
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "invrat: cannot open '" << path << "'\n";
    throw ApiFailure{INVRAT_IO_ERROR};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteText(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
      std::cerr << "invrat: cannot write '" << path << "'\n";
      throw ApiFailure{INVRAT_IO_ERROR};
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    std::cerr << "invrat: cannot write '" << path << "'\n";
    throw ApiFailure{INVRAT_IO_ERROR};
  }
}

// Parses a JSON config file into an object; an empty path gives {}.
json ConfigFile(const std::string& path) {
  if (path.empty()) return json::object();
  json doc = json::parse(ReadText(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    std::cerr << "invrat: '" << path << "' is not a JSON object\n";
    throw ApiFailure{INVRAT_PARSE_ERROR};
  }
  return doc;
}

json Provenance(const std::string& command, const json& inputs) {
  return {{"tool", "invrat"}, {"version", invrat_version()}, {"command", command},
          {"inputs", inputs}};
}

// ---- oracle ----------------------------------------------------------------

struct OracleArgs {
  std::string preset;
  std::string spec;
  int grid = 5;
  double tol = 1e-6;
  std::optional<bool> fixtures;
  std::string out;
};

int RunOracleCmd(const OracleArgs& a) {
  const bool fixtures = a.fixtures.value_or(a.preset == "shift");
  const json options = {{"grid_points", a.grid}, {"invariance_tol", a.tol},
                        {"check_fixtures", fixtures}};
  Owned report, table;
  const std::string preset = a.spec.empty() && a.preset.empty() ? "shift" : a.preset;
  const invrat_status st =
      invrat_oracle_run(preset.empty() ? nullptr : preset.c_str(),
                        a.spec.empty() ? nullptr : a.spec.c_str(), options.dump().c_str(),
                        &report.p, &table.p);
  if (st != INVRAT_OK && st != INVRAT_FIXTURE_FAILED) throw ApiFailure{st};
  std::cout << table.str();
  if (!a.out.empty()) {
    WriteText(a.out, report.str());
    WriteText(a.out + ".provenance.json",
              Provenance("oracle", {{"preset", preset}, {"spec", a.spec}, {"options", options}})
                      .dump(2) +
                  "\n");
  }
  if (st == INVRAT_FIXTURE_FAILED) {
    Report(st);
    return kExitFixture;
  }
  return kExitOk;
}

// ---- gen -------------------------------------------------------------------

struct GenArgs {
  std::string kind = "bias";
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int RunGenCmd(const GenArgs& a) {
  json config = ConfigFile(a.config);
  if (a.seed) config["seed"] = *a.seed;
  invrat_corpus* raw = nullptr;
  Check(invrat_corpus_generate(a.kind.c_str(), config.dump().c_str(), &raw));
  CorpusPtr corpus(raw);
  Check(invrat_corpus_save(corpus.get(), a.out.c_str()));
  Owned info;
  Check(invrat_corpus_info(corpus.get(), &info.p));
  WriteText(a.out + ".provenance.json",
            Provenance("gen", {{"kind", a.kind}, {"corpus", json::parse(info.str())}}).dump(2) +
                "\n");
  std::cout << info.str() << "\n";
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string corpus;
  std::string config;
  std::vector<double> lambdas;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::string h;
  std::string mode;
  std::optional<double> alpha;
  std::optional<double> mu1;
  std::optional<double> mu2;
  std::optional<std::size_t> length;
  std::optional<double> lr;
  std::optional<double> generator_lr;
  std::optional<std::size_t> batch;
  std::string out;
};

int RunTrainCmd(const TrainArgs& a) {
  CorpusPtr corpus = LoadCorpus(a.corpus);
  json game = ConfigFile(a.config);
  if (a.seed) game["seed"] = *a.seed;
  if (a.steps) game["steps"] = *a.steps;
  if (!a.h.empty()) game["h"] = a.h;
  if (!a.mode.empty()) game["constraint"] = a.mode;
  if (a.alpha) game["alpha_sparsity"] = *a.alpha;
  if (a.mu1) game["mu1"] = *a.mu1;
  if (a.mu2) game["mu2"] = *a.mu2;
  if (a.length) game["rationale_len"] = *a.length;
  if (a.lr) game["learning_rate"] = *a.lr;
  if (a.generator_lr) game["generator_lr"] = *a.generator_lr;
  if (a.batch) game["batch_size"] = *a.batch;
  std::vector<double> lambdas = a.lambdas;
  if (lambdas.empty()) {
    lambdas.push_back(game.contains("lambda") ? game["lambda"].get<double>() : 0.0);
  }
  game.erase("lambda");
  Owned summary;
  Check(invrat_train_grid(corpus.get(), game.dump().c_str(), lambdas.data(), lambdas.size(),
                          a.out.c_str(), &summary.p));
  for (const auto& run : json::parse(summary.str())) {
    std::printf("lambda %-8g best dev acc %-8s at step %-6zu final L_i %.4f L_e %.4f  -> %s\n",
                run["lambda"].get<double>(),
                run["best_dev_acc"].is_null()
                    ? "n/a"
                    : std::to_string(run["best_dev_acc"].get<double>()).substr(0, 6).c_str(),
                run["best_step"].get<std::size_t>(), run["final_li"].get<double>(),
                run["final_le"].get<double>(), run["dir"].get<std::string>().c_str());
  }
  return kExitOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string corpus;
  std::string split = "test";
  std::string out;
};

int RunEvalCmd(const EvalArgs& a) {
  CorpusPtr corpus = LoadCorpus(a.corpus);
  invrat_model* raw = nullptr;
  Check(invrat_model_load(a.checkpoint.c_str(), &raw));
  ModelPtr model(raw);
  const std::string html = (std::filesystem::path(a.out) / "report.html").string();
  const std::string metrics = (std::filesystem::path(a.out) / "metrics.json").string();
  Owned report, config;
  Check(invrat_evaluate(model.get(), corpus.get(), a.split.c_str(), html.c_str(), &report.p));
  Check(invrat_model_config(model.get(), &config.p));
  WriteText(metrics, report.str());
  WriteText((std::filesystem::path(a.out) / "provenance.json").string(),
            Provenance("eval", {{"checkpoint", a.checkpoint},
                                {"corpus", a.corpus},
                                {"split", a.split},
                                {"game", json::parse(config.str())}})
                    .dump(2) +
                "\n");
  const json r = json::parse(report.str());
  std::printf("split %s  n %zu  accuracy %.4f  (majority %.4f)\n", a.split.c_str(),
              r["count"].get<std::size_t>(), r["accuracy"].get<double>(),
              r["majority_baseline"].get<double>());
  std::printf("micro P %.4f R %.4f F1 %.4f   macro P %.4f R %.4f F1 %.4f\n",
              r["micro"]["precision"].get<double>(), r["micro"]["recall"].get<double>(),
              r["micro"]["f1"].get<double>(), r["macro"]["precision"].get<double>(),
              r["macro"]["recall"].get<double>(), r["macro"]["f1"].get<double>());
  if (!r["bias_highlighted"].is_null()) {
    std::printf("bias highlighted %.4f\n", r["bias_highlighted"].get<double>());
  }
  if (!r["invariance_gap"].is_null()) {
    std::printf("held-out L_i %.4f  L_e %.4f  gap %.4f\n", r["holdout_li"].get<double>(),
                r["holdout_le"].get<double>(), r["invariance_gap"].get<double>());
  }
  std::printf("wrote %s and %s\n", metrics.c_str(), html.c_str());
  return kExitOk;
}

// ---- repro -----------------------------------------------------------------

struct ReproArgs {
  std::uint64_t seed = 1;
  std::vector<double> lambdas;
  std::size_t steps = 0;
  std::string only;
  std::string out = "repro";
};

int RunReproCmd(const ReproArgs& a) {
  json options = {{"seed", a.seed}, {"steps", a.steps}};
  if (!a.lambdas.empty()) options["lambdas"] = a.lambdas;
  if (!a.only.empty()) {
    options["bias"] = a.only == "bias";
    options["aspect"] = a.only == "aspect";
  }
  Owned table;
  Check(invrat_repro(options.dump().c_str(), a.out.c_str(), &table.p));
  std::cout << table.str();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"invrat: invariant rationalization experiments"};
  app.set_version_flag("--version", std::string(invrat_version()));
  app.require_subcommand(1);

  OracleArgs oracle;
  auto* cmd_oracle = app.add_subcommand(
      "oracle", "Exact conditionals, invariance verdicts and the minimax search on a graph");
  cmd_oracle->add_option("--preset", oracle.preset, "Built-in graph: shift, toy or uniform")
      ->check(CLI::IsMember({"shift", "toy", "uniform"}));
  cmd_oracle->add_option("--spec", oracle.spec, "Graph spec file (JSON)")
      ->check(CLI::ExistingFile)
      ->excludes("--preset");
  cmd_oracle->add_option("--grid", oracle.grid,
                         "Midpoint grid points per adversary parameter (0 skips the search)")
      ->check(CLI::Range(0, 64));
  cmd_oracle->add_option("--tol", oracle.tol, "Invariance tolerance on I(Y;E|Z)");
  cmd_oracle->add_option("--check-fixtures", oracle.fixtures,
                         "Compare against the reference values (default: on for shift)");
  cmd_oracle->add_option("--out", oracle.out, "Write the report as JSON");

  GenArgs gen;
  auto* cmd_gen = app.add_subcommand("gen", "Generate a synthetic corpus");
  cmd_gen->add_option("--kind", gen.kind, "bias or aspect")
      ->check(CLI::IsMember({"bias", "aspect"}));
  cmd_gen->add_option("--config", gen.config, "Generator config (JSON)")
      ->check(CLI::ExistingFile);
  cmd_gen->add_option("--seed", gen.seed, "Override the config seed");
  cmd_gen->add_option("--out", gen.out, "Corpus path (JSONL); vocab goes to <out>.vocab")
      ->required();

  TrainArgs train;
  auto* cmd_train = app.add_subcommand("train", "Train one model per lambda");
  cmd_train->add_option("--corpus", train.corpus, "Corpus path")->required()->check(
      CLI::ExistingFile);
  cmd_train->add_option("--config", train.config, "Game config (JSON); flags override it")
      ->check(CLI::ExistingFile);
  cmd_train->add_option("--lambda", train.lambdas, "Lambda grid, e.g. --lambda 0 4 10")
      ->delimiter(',');
  cmd_train->add_option("--seed", train.seed);
  cmd_train->add_option("--steps", train.steps);
  cmd_train->add_option("--h-kind", train.h, "identity or relu")
      ->check(CLI::IsMember({"identity", "relu"}));
  cmd_train->add_option("--mode", train.mode, "soft or hard")
      ->check(CLI::IsMember({"soft", "hard"}));
  cmd_train->add_option("--alpha", train.alpha, "Soft-mode target selection fraction");
  cmd_train->add_option("--mu1", train.mu1);
  cmd_train->add_option("--mu2", train.mu2);
  cmd_train->add_option("--length", train.length, "Hard-mode rationale length");
  cmd_train->add_option("--lr", train.lr, "Predictor learning rate");
  cmd_train->add_option("--generator-lr", train.generator_lr, "Generator learning rate");
  cmd_train->add_option("--batch", train.batch);
  cmd_train->add_option("--out", train.out, "Output directory")->required();

  EvalArgs eval;
  auto* cmd_eval = app.add_subcommand("eval", "Evaluate a checkpoint on a corpus split");
  cmd_eval->add_option("--checkpoint", eval.checkpoint)->required()->check(CLI::ExistingFile);
  cmd_eval->add_option("--corpus", eval.corpus)->required()->check(CLI::ExistingFile);
  cmd_eval->add_option("--split", eval.split)
      ->check(CLI::IsMember({"train", "holdout", "val", "test"}));
  cmd_eval->add_option("--out", eval.out, "Directory for metrics.json and report.html")
      ->required();

  ReproArgs repro;
  auto* cmd_repro = app.add_subcommand(
      "repro", "Generate, train lambda 0 and the grid, evaluate, and tabulate");
  cmd_repro->add_option("--seed", repro.seed);
  cmd_repro->add_option("--lambda", repro.lambdas, "Nonzero lambda grid (default 10,30)")
      ->delimiter(',');
  cmd_repro->add_option("--steps", repro.steps, "Override the step count (0 keeps tuned)");
  cmd_repro->add_option("--only", repro.only, "Run a single corpus: bias or aspect")
      ->check(CLI::IsMember({"bias", "aspect"}));
  cmd_repro->add_option("--out", repro.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*cmd_oracle) return RunOracleCmd(oracle);
    if (*cmd_gen) return RunGenCmd(gen);
    if (*cmd_train) return RunTrainCmd(train);
    if (*cmd_eval) return RunEvalCmd(eval);
    if (*cmd_repro) return RunReproCmd(repro);
  } catch (const ApiFailure& f) {
    if (invrat_last_error()[0] != '\0') Report(f.status);
    return ExitFor(f.status);
  } catch (const json::exception& e) {
    std::cerr << "invrat: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOther;
}
