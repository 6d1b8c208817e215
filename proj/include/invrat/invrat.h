/* Copyright 2026 The InvRat Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libinvrat.
 *
 * Every call returns an invrat_status. On failure the message (and, for
 * parse errors, the line) is kept per thread until the next call.
 * Strings returned through char** are heap copies owned by the caller and
 * released with invrat_string_free. Configs travel as JSON text; NULL or ""
 * selects the defaults.
 */

#ifndef INVRAT_INVRAT_H_
#define INVRAT_INVRAT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(INVRAT_BUILDING_LIBRARY)
#define INVRAT_API __declspec(dllexport)
#else
#define INVRAT_API __declspec(dllimport)
#endif
#else
#define INVRAT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum invrat_status {
  INVRAT_OK = 0,
  INVRAT_INVALID_ARGUMENT = 1,
  INVRAT_PARSE_ERROR = 2,
  INVRAT_IO_ERROR = 3,
  INVRAT_UNDEFINED = 4, /* conditioning on a zero-probability event */
  INVRAT_DIVERGED = 5,  /* non-finite loss during training */
  INVRAT_FIXTURE_FAILED = 6,
  INVRAT_INTERNAL = 7
} invrat_status;

typedef struct invrat_corpus invrat_corpus;
typedef struct invrat_model invrat_model;

INVRAT_API const char* invrat_version(void);
INVRAT_API const char* invrat_status_name(invrat_status status);

/* Message of the last failed call on this thread; "" when none. */
INVRAT_API const char* invrat_last_error(void);
/* 1-based line of the last parse error; 0 when unknown. */
INVRAT_API size_t invrat_last_error_line(void);
/* Step and last finite losses of the last divergence on this thread. */
INVRAT_API void invrat_last_divergence(long* step, double* last_li, double* last_le);

INVRAT_API void invrat_string_free(char* s);

/* Oracle over a graph spec. Exactly one of `preset` ("shift", "toy",
 * "uniform") and `graph_path` is non-NULL. `options_json` keys:
 * grid_points, invariance_tol, check_fixtures. Both outputs are optional.
 * Returns INVRAT_FIXTURE_FAILED, with the outputs filled, when fixture
 * checks were requested and missed their tolerance. */
INVRAT_API invrat_status invrat_oracle_run(const char* preset, const char* graph_path,
                                           const char* options_json, char** report_json,
                                           char** table_text);

/* kind: "bias" or "aspect"; config_json is the generator config. */
INVRAT_API invrat_status invrat_corpus_generate(const char* kind, const char* config_json,
                                                invrat_corpus** out);
INVRAT_API invrat_status invrat_corpus_load(const char* path, invrat_corpus** out);
INVRAT_API invrat_status invrat_corpus_save(const invrat_corpus* corpus, const char* path);
/* Kind, sizes, split counts and generator config. */
INVRAT_API invrat_status invrat_corpus_info(const invrat_corpus* corpus, char** info_json);
INVRAT_API void invrat_corpus_free(invrat_corpus* corpus);

/* Tuned game config for a corpus ("bias" or "aspect"), as JSON. */
INVRAT_API invrat_status invrat_default_game_config(const invrat_corpus* corpus,
                                                    char** config_json);

/* Fresh, untrained model sized for `corpus`. */
INVRAT_API invrat_status invrat_model_create(const invrat_corpus* corpus,
                                             const char* game_config_json,
                                             invrat_model** out);
INVRAT_API invrat_status invrat_model_load(const char* path, invrat_model** out);
INVRAT_API invrat_status invrat_model_save(const invrat_model* model, const char* path);
INVRAT_API invrat_status invrat_model_config(const invrat_model* model, char** config_json);
INVRAT_API void invrat_model_free(invrat_model* model);

/* Trains one model per lambda (game_config_json supplies everything else)
 * and writes run directories under out_dir. `summary_json` lists, per run,
 * lambda, directory, best dev accuracy and step, and final losses. */
INVRAT_API invrat_status invrat_train_grid(const invrat_corpus* corpus,
                                           const char* game_config_json,
                                           const double* lambdas, size_t num_lambdas,
                                           const char* out_dir, char** summary_json);

/* split: "train", "holdout", "val" or "test". html_path may be NULL. */
INVRAT_API invrat_status invrat_evaluate(invrat_model* model, const invrat_corpus* corpus,
                                         const char* split, const char* html_path,
                                         char** report_json);

/* options_json keys: seed, lambdas, bias, aspect, steps. Writes the full
 * pipeline under out_dir; `table_md` receives the comparison table. */
INVRAT_API invrat_status invrat_repro(const char* options_json, const char* out_dir,
                                      char** table_md);

#ifdef __cplusplus
}
#endif

#endif /* INVRAT_INVRAT_H_ */
