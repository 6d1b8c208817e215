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

#include "invrat/eval.hpp"

#include <cstdio>

#include "invrat/error.hpp"
#include "invrat/io.hpp"
#include "json.hpp"

namespace invrat {
namespace {

using json = nlohmann::json;

void CheckAligned(const std::vector<Mask>& predicted, const std::vector<Mask>& truth) {
  if (predicted.size() != truth.size()) {
    throw InvalidArgument("got " + std::to_string(predicted.size()) +
                          " predicted masks for " + std::to_string(truth.size()) +
                          " truth masks");
  }
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i].size() != truth[i].size()) {
      throw InvalidArgument("mask length mismatch at example " + std::to_string(i));
    }
  }
}

double F1(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string Opt(const std::optional<double>& v) { return v ? Num(*v) : "n/a"; }

json OptJson(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json ScoresJson(const SelectionScores& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
          {"selected", s.selected},   {"truth", s.truth},   {"overlap", s.overlap},
          {"empty_prediction", s.empty_prediction}};
}

}  // namespace

SelectionScores ScoreSelectionMicro(const std::vector<Mask>& predicted,
                                    const std::vector<Mask>& truth) {
  CheckAligned(predicted, truth);
  SelectionScores s;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    for (std::size_t n = 0; n < predicted[i].size(); ++n) {
      s.selected += predicted[i][n] != 0;
      s.truth += truth[i][n] != 0;
      s.overlap += predicted[i][n] != 0 && truth[i][n] != 0;
    }
  }
  s.empty_prediction = s.selected == 0;
  s.precision = s.selected ? static_cast<double>(s.overlap) / s.selected : 0.0;
  s.recall = s.truth ? static_cast<double>(s.overlap) / s.truth : 0.0;
  s.f1 = F1(s.precision, s.recall);
  return s;
}

SelectionScores ScoreSelectionMacro(const std::vector<Mask>& predicted,
                                    const std::vector<Mask>& truth) {
  const std::size_t n = predicted.size();
  SelectionScores s;
  if (n == 0) {
    CheckAligned(predicted, truth);
    s.empty_prediction = true;
    return s;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const SelectionScores one = ScoreSelectionMicro({predicted[i]}, {truth[i]});
    s.precision += one.precision;
    s.recall += one.recall;
    s.f1 += one.f1;
    s.empty_prediction |= one.empty_prediction;
  }
  s.precision /= n;
  s.recall /= n;
  s.f1 /= n;
  s.selected = s.truth = s.overlap = n;
  return s;
}

double BiasRate(const std::vector<Mask>& predicted,
                const std::vector<const Example*>& examples) {
  if (predicted.size() != examples.size()) {
    throw InvalidArgument("bias rate: masks and examples differ in count");
  }
  bool any_bias = false;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Mask& bias = examples[i]->bias;
    if (predicted[i].size() != bias.size()) {
      throw InvalidArgument("bias rate: mask length mismatch at example " + std::to_string(i));
    }
    bool hit = false;
    for (std::size_t n = 0; n < bias.size(); ++n) {
      any_bias |= bias[n] != 0;
      hit |= bias[n] != 0 && predicted[i][n] != 0;
    }
    hits += hit;
  }
  if (!any_bias) throw InvalidArgument("bias rate: corpus has no bias positions");
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

Evaluation Evaluate(GameModel& model, const Corpus& corpus, Split split) {
  Evaluation ev;
  ev.rows = corpus.split(split);
  ev.prediction = Predict(model, ev.rows);
  EvalReport& r = ev.report;
  r.split = std::string(SplitName(split));
  r.count = ev.rows.size();
  r.accuracy = Accuracy(ev.prediction, ev.rows);

  std::vector<Mask> truth;
  std::size_t positives = 0, selected = 0, tokens = 0;
  bool has_bias = false;
  for (std::size_t i = 0; i < ev.rows.size(); ++i) {
    const Example* ex = ev.rows[i];
    truth.push_back(ex->truth);
    positives += ex->label;
    for (std::size_t n = 0; n < ex->bias.size(); ++n) has_bias |= ex->bias[n] != 0;
    for (auto m : ev.prediction.masks[i]) selected += m != 0;
    tokens += ex->tokens.size();
  }
  if (r.count > 0) {
    const double pos = static_cast<double>(positives) / r.count;
    r.majority_baseline = std::max(pos, 1.0 - pos);
  }
  r.selection_rate = tokens ? static_cast<double>(selected) / tokens : 0.0;
  r.micro = ScoreSelectionMicro(ev.prediction.masks, truth);
  r.macro = ScoreSelectionMacro(ev.prediction.masks, truth);
  if (has_bias) r.bias_highlighted = BiasRate(ev.prediction.masks, ev.rows);

  const auto holdout = corpus.split(Split::kHoldout);
  if (!holdout.empty() && !model.config().two_player) {
    const HeldOutLosses losses = EvaluateLosses(model, holdout);
    r.holdout_li = losses.li;
    r.holdout_le = losses.le;
    r.invariance_gap = losses.li - losses.le;
  }
  return ev;
}

std::string EvalReportJson(const EvalReport& r) {
  const json doc = {{"split", r.split},
                    {"count", r.count},
                    {"accuracy", r.accuracy},
                    {"majority_baseline", r.majority_baseline},
                    {"selection_rate", r.selection_rate},
                    {"micro", ScoresJson(r.micro)},
                    {"macro", ScoresJson(r.macro)},
                    {"bias_highlighted", OptJson(r.bias_highlighted)},
                    {"holdout_li", OptJson(r.holdout_li)},
                    {"holdout_le", OptJson(r.holdout_le)},
                    {"invariance_gap", OptJson(r.invariance_gap)}};
  return doc.dump(2) + "\n";
}

std::string RenderReportHtml(const EvalReport& report, const Corpus& corpus,
                             const std::vector<const Example*>& rows,
                             const std::vector<Mask>& masks, std::size_t max_examples) {
  if (rows.size() != masks.size()) {
    throw InvalidArgument("report: masks and examples differ in count");
  }
  std::string h;
  h += "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">\n";
  h += "<title>rationale report: " + Escape(report.split) + "</title>\n";
  h += "<style>\n"
       "body{font-family:sans-serif;margin:2em}\n"
       "table{border-collapse:collapse;margin-bottom:1.5em}\n"
       "td,th{border:1px solid #999;padding:2px 8px;text-align:right}\n"
       ".strip{font-family:monospace;margin:3px 0}\n"
       ".tok{padding:0 2px}\n"
       ".sel{background:#ffd54f}\n"
       ".gt{text-decoration:underline;text-decoration-thickness:2px}\n"
       ".bad{color:#b00020}\n"
       "</style></head><body>\n";
  h += "<h1>Rationale report: " + Escape(report.split) + " split</h1>\n";
  h += "<table><tr><th>metric</th><th>value</th></tr>\n";
  auto row = [&](const std::string& k, const std::string& v) {
    h += "<tr><td>" + k + "</td><td>" + v + "</td></tr>\n";
  };
  row("examples", std::to_string(report.count));
  row("accuracy", Num(report.accuracy));
  row("majority baseline", Num(report.majority_baseline));
  row("selection rate", Num(report.selection_rate));
  row("bias highlighted", Opt(report.bias_highlighted));
  row("held-out L_i", Opt(report.holdout_li));
  row("held-out L_e", Opt(report.holdout_le));
  row("invariance gap L_i - L_e", Opt(report.invariance_gap));
  h += "</table>\n";
  h += "<table><tr><th>averaging</th><th>precision</th><th>recall</th><th>F1</th></tr>\n";
  for (const auto& [name, s] : {std::pair{"micro (tokens)", report.micro},
                                std::pair{"macro (examples)", report.macro}}) {
    h += std::string("<tr><td>") + name + "</td><td>" + Num(s.precision) + "</td><td>" +
         Num(s.recall) + "</td><td>" + Num(s.f1) + "</td></tr>\n";
  }
  h += "</table>\n";
  h += "<p>Highlighted: selected by the generator. Underlined: ground-truth rationale.</p>\n";
  h += "<div>\n";
  const std::size_t shown = std::min(max_examples, rows.size());
  for (std::size_t i = 0; i < shown; ++i) {
    const Example& ex = *rows[i];
    h += "<div class=\"strip\">#" + std::to_string(i) + " y=" + std::to_string(ex.label) + " ";
    for (std::size_t n = 0; n < ex.tokens.size(); ++n) {
      std::string cls = "tok";
      if (masks[i][n]) cls += " sel";
      if (ex.truth[n]) cls += " gt";
      if (ex.bias[n]) cls += " bad";
      const int t = ex.tokens[n];
      const std::string text = t >= 0 && static_cast<std::size_t>(t) < corpus.vocab.size()
                                   ? corpus.vocab[t]
                                   : "?";
      h += "<span class=\"" + cls + "\">" + Escape(text) + "</span>";
    }
    h += "</div>\n";
  }
  h += "</div>\n</body></html>\n";
  return h;
}

void WriteReportHtml(const std::string& path, const EvalReport& report,
                     const Corpus& corpus, const std::vector<const Example*>& rows,
                     const std::vector<Mask>& masks, std::size_t max_examples) {
  WriteFileAtomic(path, RenderReportHtml(report, corpus, rows, masks, max_examples));
}

}  // namespace invrat
