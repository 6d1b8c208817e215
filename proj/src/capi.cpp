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

#include "invrat/invrat.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "invrat/corpus.hpp"
#include "invrat/datagen.hpp"
#include "invrat/error.hpp"
#include "invrat/eval.hpp"
#include "invrat/game.hpp"
#include "invrat/graph_file.hpp"
#include "invrat/oracle_report.hpp"
#include "invrat/pipeline.hpp"
#include "json.hpp"

struct invrat_corpus {
  invrat::Corpus corpus;
};

struct invrat_model {
  invrat::GameModel model;
};

namespace {

using json = nlohmann::json;

struct LastError {
  std::string message;
  std::size_t line = 0;
  long step = 0;
  double li = 0.0;
  double le = 0.0;
};

thread_local LastError last_error;

invrat_status Fail(invrat_status status, const std::string& message) {
  last_error = LastError{};
  last_error.message = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
invrat_status Guard(F&& body) {
  try {
    last_error = LastError{};
    return body();
  } catch (const invrat::ParseError& e) {
    Fail(INVRAT_PARSE_ERROR, e.what());
    last_error.line = e.line();
    return INVRAT_PARSE_ERROR;
  } catch (const invrat::DivergenceError& e) {
    Fail(INVRAT_DIVERGED, e.what());
    last_error.step = e.step();
    last_error.li = e.last_li();
    last_error.le = e.last_le();
    return INVRAT_DIVERGED;
  } catch (const invrat::InvalidArgument& e) {
    return Fail(INVRAT_INVALID_ARGUMENT, e.what());
  } catch (const invrat::IoError& e) {
    return Fail(INVRAT_IO_ERROR, e.what());
  } catch (const invrat::UndefinedConditional& e) {
    return Fail(INVRAT_UNDEFINED, e.what());
  } catch (const json::parse_error& e) {
    return Fail(INVRAT_PARSE_ERROR, e.what());
  } catch (const json::exception& e) {
    return Fail(INVRAT_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return Fail(INVRAT_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(INVRAT_INTERNAL, e.what());
  } catch (...) {
    return Fail(INVRAT_INTERNAL, "unknown error");
  }
}

char* Copy(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void Emit(char** out, const std::string& s) {
  if (out) *out = Copy(s);
}

bool Empty(const char* s) { return s == nullptr || *s == '\0'; }

json ParseOptions(const char* text, const char* what) {
  if (Empty(text)) return json::object();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw invrat::ParseError(std::string(what) + ": " + e.what(), 0);
  }
  if (!doc.is_object()) throw invrat::ParseError(std::string(what) + ": expected an object", 0);
  return doc;
}

void Require(const void* p, const char* name) {
  if (p == nullptr) throw invrat::InvalidArgument(std::string(name) + " is NULL");
}

invrat::GameConfig DefaultGameConfig(const invrat::Corpus& corpus) {
  if (corpus.kind == "aspect") {
    return invrat::AspectGameConfig(invrat::AspectConfigFromJson(corpus.config_json));
  }
  return invrat::BiasGameConfig();
}

// Defaults for the corpus, overridden by the keys present in `text`.
invrat::GameConfig MergedGameConfig(const invrat::Corpus& corpus, const char* text) {
  json merged = json::parse(invrat::GameConfigToJson(DefaultGameConfig(corpus)));
  merged.update(ParseOptions(text, "game config"));
  return invrat::GameConfigFromJson(merged.dump());
}

}  // namespace

extern "C" {

const char* invrat_version(void) { return invrat::kVersion; }

const char* invrat_status_name(invrat_status status) {
  switch (status) {
    case INVRAT_OK: return "ok";
    case INVRAT_INVALID_ARGUMENT: return "invalid argument";
    case INVRAT_PARSE_ERROR: return "parse error";
    case INVRAT_IO_ERROR: return "i/o error";
    case INVRAT_UNDEFINED: return "undefined conditional";
    case INVRAT_DIVERGED: return "diverged";
    case INVRAT_FIXTURE_FAILED: return "fixture failed";
    case INVRAT_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* invrat_last_error(void) { return last_error.message.c_str(); }

size_t invrat_last_error_line(void) { return last_error.line; }

void invrat_last_divergence(long* step, double* last_li, double* last_le) {
  if (step) *step = last_error.step;
  if (last_li) *last_li = last_error.li;
  if (last_le) *last_le = last_error.le;
}

void invrat_string_free(char* s) { std::free(s); }

invrat_status invrat_oracle_run(const char* preset, const char* graph_path,
                                const char* options_json, char** report_json,
                                char** table_text) {
  return Guard([&] {
    if (Empty(preset) == Empty(graph_path)) {
      throw invrat::InvalidArgument("give exactly one of a preset and a graph file");
    }
    const invrat::oracle::GraphFile graph = Empty(preset)
                                                ? invrat::oracle::LoadGraphFile(graph_path)
                                                : invrat::oracle::PresetGraph(preset);
    const json opts = ParseOptions(options_json, "oracle options");
    invrat::oracle::OracleOptions options;
    for (const auto& [key, v] : opts.items()) {
      if (key == "grid_points") {
        options.grid_points = v.get<int>();
      } else if (key == "invariance_tol") {
        options.invariance_tol = v.get<double>();
      } else if (key == "check_fixtures") {
        options.check_fixtures = v.get<bool>();
      } else {
        throw invrat::InvalidArgument("oracle options: unknown key '" + key + "'");
      }
    }
    const invrat::oracle::OracleReport report = invrat::oracle::RunOracle(graph, options);
    Emit(report_json, invrat::oracle::OracleReportJson(report));
    Emit(table_text, invrat::oracle::FormatOracleTable(report));
    if (!report.fixtures_pass()) {
      return Fail(INVRAT_FIXTURE_FAILED, "oracle fixtures missed their tolerance");
    }
    return INVRAT_OK;
  });
}

invrat_status invrat_corpus_generate(const char* kind, const char* config_json,
                                     invrat_corpus** out) {
  return Guard([&] {
    Require(kind, "kind");
    Require(out, "out");
    const std::string k = kind;
    const std::string cfg = Empty(config_json) ? "{}" : config_json;
    auto handle = std::make_unique<invrat_corpus>();
    if (k == "bias") {
      handle->corpus = invrat::GenBiasCorpus(invrat::BiasConfigFromJson(cfg));
    } else if (k == "aspect") {
      handle->corpus = invrat::GenAspectCorpus(invrat::AspectConfigFromJson(cfg));
    } else {
      throw invrat::InvalidArgument("corpus kind must be bias or aspect, got '" + k + "'");
    }
    *out = handle.release();
    return INVRAT_OK;
  });
}

invrat_status invrat_corpus_load(const char* path, invrat_corpus** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    auto handle = std::make_unique<invrat_corpus>();
    handle->corpus = invrat::LoadCorpus(path);
    *out = handle.release();
    return INVRAT_OK;
  });
}

invrat_status invrat_corpus_save(const invrat_corpus* corpus, const char* path) {
  return Guard([&] {
    Require(corpus, "corpus");
    Require(path, "path");
    invrat::SaveCorpus(path, corpus->corpus);
    return INVRAT_OK;
  });
}

invrat_status invrat_corpus_info(const invrat_corpus* corpus, char** info_json) {
  return Guard([&] {
    Require(corpus, "corpus");
    const invrat::Corpus& c = corpus->corpus;
    json splits = json::object();
    for (auto s : {invrat::Split::kTrain, invrat::Split::kHoldout, invrat::Split::kVal,
                   invrat::Split::kTest}) {
      splits[std::string(invrat::SplitName(s))] = c.count(s);
    }
    const json info = {{"kind", c.kind},
                       {"seq_len", c.seq_len},
                       {"num_envs", c.num_envs},
                       {"vocab_size", c.vocab.size()},
                       {"examples", c.examples.size()},
                       {"splits", splits},
                       {"config", json::parse(c.config_json)}};
    Emit(info_json, info.dump(2));
    return INVRAT_OK;
  });
}

void invrat_corpus_free(invrat_corpus* corpus) { delete corpus; }

invrat_status invrat_default_game_config(const invrat_corpus* corpus, char** config_json) {
  return Guard([&] {
    Require(corpus, "corpus");
    Emit(config_json, invrat::GameConfigToJson(DefaultGameConfig(corpus->corpus)));
    return INVRAT_OK;
  });
}

invrat_status invrat_model_create(const invrat_corpus* corpus, const char* game_config_json,
                                  invrat_model** out) {
  return Guard([&] {
    Require(corpus, "corpus");
    Require(out, "out");
    const invrat::Corpus& c = corpus->corpus;
    const invrat::GameConfig config = MergedGameConfig(c, game_config_json);
    config.Validate(c.seq_len);
    *out = new invrat_model{invrat::GameModel(config, c.vocab.size(), c.seq_len, c.num_envs)};
    return INVRAT_OK;
  });
}

invrat_status invrat_model_load(const char* path, invrat_model** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = new invrat_model{invrat::LoadModel(path)};
    return INVRAT_OK;
  });
}

invrat_status invrat_model_save(const invrat_model* model, const char* path) {
  return Guard([&] {
    Require(model, "model");
    Require(path, "path");
    invrat::SaveModel(path, model->model);
    return INVRAT_OK;
  });
}

invrat_status invrat_model_config(const invrat_model* model, char** config_json) {
  return Guard([&] {
    Require(model, "model");
    Emit(config_json, invrat::GameConfigToJson(model->model.config()));
    return INVRAT_OK;
  });
}

void invrat_model_free(invrat_model* model) { delete model; }

invrat_status invrat_train_grid(const invrat_corpus* corpus, const char* game_config_json,
                                const double* lambdas, size_t num_lambdas,
                                const char* out_dir, char** summary_json) {
  return Guard([&] {
    Require(corpus, "corpus");
    Require(out_dir, "out_dir");
    if (num_lambdas > 0) Require(lambdas, "lambdas");
    const invrat::GameConfig base = MergedGameConfig(corpus->corpus, game_config_json);
    const std::vector<double> grid(lambdas, lambdas + num_lambdas);
    std::vector<invrat::TrainedRun> runs =
        invrat::TrainGrid(corpus->corpus, base, grid, out_dir);
    json summary = json::array();
    for (const invrat::TrainedRun& run : runs) {
      const invrat::TraceRecord& last = run.trace.back();
      summary.push_back({{"lambda", run.lambda},
                         {"dir", run.dir},
                         {"best_dev_acc", run.best_dev_acc ? json(*run.best_dev_acc)
                                                           : json(nullptr)},
                         {"best_step", run.best_step},
                         {"final_li", last.li},
                         {"final_le", last.le}});
    }
    Emit(summary_json, summary.dump(2));
    return INVRAT_OK;
  });
}

invrat_status invrat_evaluate(invrat_model* model, const invrat_corpus* corpus,
                              const char* split, const char* html_path, char** report_json) {
  return Guard([&] {
    Require(model, "model");
    Require(corpus, "corpus");
    Require(split, "split");
    const invrat::Evaluation ev =
        invrat::Evaluate(model->model, corpus->corpus, invrat::ParseSplit(split));
    if (!Empty(html_path)) {
      invrat::WriteReportHtml(html_path, ev.report, corpus->corpus, ev.rows,
                              ev.prediction.masks);
    }
    Emit(report_json, invrat::EvalReportJson(ev.report));
    return INVRAT_OK;
  });
}

invrat_status invrat_repro(const char* options_json, const char* out_dir, char** table_md) {
  return Guard([&] {
    Require(out_dir, "out_dir");
    invrat::ReproOptions options;
    for (const auto& [key, v] : ParseOptions(options_json, "repro options").items()) {
      if (key == "seed") {
        options.seed = v.get<std::uint64_t>();
      } else if (key == "lambdas") {
        options.lambdas = v.get<std::vector<double>>();
      } else if (key == "bias") {
        options.bias = v.get<bool>();
      } else if (key == "aspect") {
        options.aspect = v.get<bool>();
      } else if (key == "steps") {
        options.steps = v.get<std::size_t>();
      } else {
        throw invrat::InvalidArgument("repro options: unknown key '" + key + "'");
      }
    }
    const auto rows = invrat::RunRepro(options, out_dir);
    Emit(table_md, invrat::FormatComparisonTable(rows));
    return INVRAT_OK;
  });
}

}  // extern "C"
