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

#ifndef INVRAT_EVAL_HPP_
#define INVRAT_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "invrat/corpus.hpp"
#include "invrat/game.hpp"

namespace invrat {

using Mask = std::vector<std::uint8_t>;

struct SelectionScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t selected = 0;  // micro: token counts; macro: example count
  std::size_t truth = 0;
  std::size_t overlap = 0;
  bool empty_prediction = false;  // some precision had an empty denominator
};

// Token-level scores pooled over all examples.
SelectionScores ScoreSelectionMicro(const std::vector<Mask>& predicted,
                                    const std::vector<Mask>& truth);
// Per-example scores averaged over examples.
SelectionScores ScoreSelectionMacro(const std::vector<Mask>& predicted,
                                    const std::vector<Mask>& truth);

// Fraction of examples whose selection touches a bias position. Throws
// InvalidArgument when no example has bias positions.
double BiasRate(const std::vector<Mask>& predicted,
                const std::vector<const Example*>& examples);

struct EvalReport {
  std::string split;
  std::size_t count = 0;
  double accuracy = 0.0;
  double majority_baseline = 0.0;
  double selection_rate = 0.0;  // mean fraction of tokens selected
  SelectionScores micro;
  SelectionScores macro;
  std::optional<double> bias_highlighted;
  // L_i - L_e measured on the held-out training-environment rows.
  std::optional<double> holdout_li;
  std::optional<double> holdout_le;
  std::optional<double> invariance_gap;
};

struct Evaluation {
  EvalReport report;
  std::vector<const Example*> rows;
  Prediction prediction;
};

Evaluation Evaluate(GameModel& model, const Corpus& corpus, Split split);

std::string EvalReportJson(const EvalReport& report);

// Self-contained HTML: metric tables plus one token strip per example, with
// selected tokens highlighted and ground-truth tokens underlined. At most
// `max_examples` strips are drawn.
std::string RenderReportHtml(const EvalReport& report, const Corpus& corpus,
                             const std::vector<const Example*>& rows,
                             const std::vector<Mask>& masks,
                             std::size_t max_examples = 200);
void WriteReportHtml(const std::string& path, const EvalReport& report,
                     const Corpus& corpus, const std::vector<const Example*>& rows,
                     const std::vector<Mask>& masks, std::size_t max_examples = 200);

}  // namespace invrat

#endif  // INVRAT_EVAL_HPP_
