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

// The three-player rationalization game.
//
//   g    generator: scores every position from its embedding and a width-3
//        context window, then emits a binary mask m.
//   f_i  environment-agnostic predictor: classifies the masked tokens.
//   f_e  environment-aware predictor: same, plus a one-hot env id.
//
// Per minibatch the predictors descend their own cross-entropies, then the
// generator descends
//
//   L_i + lambda * h(L_i - L_e)  [+ mu1 |mean(m) - alpha| + mu2 E sum|m_n - m_{n-1}|]
//
// with predictor weights frozen. lambda = 0 is the two-player MMI baseline.

#ifndef INVRAT_GAME_HPP_
#define INVRAT_GAME_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "invrat/adam.hpp"
#include "invrat/corpus.hpp"
#include "invrat/rng.hpp"
#include "invrat/tape.hpp"

namespace invrat {

enum class HKind { kIdentity, kRelu };
enum class ConstraintMode { kSoft, kHard };

// h(t) of the generator objective.
double ApplyH(HKind kind, double t);

struct GameConfig {
  double lambda_inv = 0.0;
  HKind h_kind = HKind::kRelu;
  ConstraintMode constraint_mode = ConstraintMode::kSoft;
  // Soft mode only.
  double mu1 = 1.0;
  double mu2 = 0.0;
  double alpha_sparsity = 0.1;
  // Hard mode only.
  std::size_t rationale_len = 3;

  std::size_t embed_dim = 16;
  std::size_t hidden_dim = 16;
  std::size_t steps = 3000;
  std::size_t batch_size = 32;
  double learning_rate = 1e-2;
  // Generator step size; 0 means learning_rate.
  double generator_lr = 3e-4;
  std::uint64_t seed = 1;

  // Drop f_e entirely (classic two-player rationalizer). Requires lambda 0.
  bool two_player = false;
  // Dev accuracy is measured every eval_every steps (0: never).
  std::size_t eval_every = 100;
  // Restore the parameters with the best dev accuracy when training ends.
  bool keep_best = true;

  // `seq_len` is the corpus sequence length N.
  void Validate(std::size_t seq_len) const;
};

std::string_view HKindName(HKind kind);
std::string_view ConstraintModeName(ConstraintMode mode);
std::string GameConfigToJson(const GameConfig& config);
// Keys absent from `text` keep their defaults; unknown keys are rejected.
GameConfig GameConfigFromJson(const std::string& text);

struct Batch {
  std::vector<int> tokens;  // [size, seq_len]
  std::vector<int> labels;
  std::vector<int> envs;    // -1 where unknown
  std::size_t size = 0;
  std::size_t seq_len = 0;

  static Batch From(const std::vector<const Example*>& examples, std::size_t seq_len);
};

class GameModel {
 public:
  GameModel(GameConfig config, std::size_t vocab_size, std::size_t seq_len,
            int num_envs);

  const GameConfig& config() const { return config_; }
  GameConfig& mutable_config() { return config_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t seq_len() const { return seq_len_; }
  int num_envs() const { return num_envs_; }

 private:
  GameConfig config_;
  std::size_t vocab_size_;
  std::size_t seq_len_;
  int num_envs_;
  ParameterStore params_;
};

// Start-of-window mask: one run of l ones per row starting at the argmax of
// the row (lowest index on ties), moved left so it ends inside the row.
Array HardWindowMask(const Array& scores, std::size_t l);

struct MaskOutput {
  Var scores;     // [B, N]
  Var surrogate;  // differentiable stand-in for the mask
  Var mask;       // straight-through: forward value is `hard`
  Array hard;     // binary [B, N]
};

// Soft mode draws one Bernoulli sample per token from `rng`; pass
// `reuse_hard` to keep a previous draw instead. Hard mode ignores both.
MaskOutput GenerateMask(Tape& tape, GameModel& model, const Batch& batch,
                        Rng* rng, const Array* reuse_hard = nullptr);

// Deterministic mask used at prediction time: the hard window, or soft
// probabilities thresholded at 0.5.
Array PredictionMask(GameModel& model, const Batch& batch);

// Logits [B, 2].
Var PredictorLogitsI(Tape& tape, GameModel& model, const Batch& batch, Var mask);
Var PredictorLogitsE(Tape& tape, GameModel& model, const Batch& batch, Var mask);

struct PredictorLosses {
  Var li;
  Var le;  // invalid in two-player mode
};

PredictorLosses ComputePredictorLosses(Tape& tape, GameModel& model,
                                       const Batch& batch, Var mask);

// The generator loss. With lambda = 0 in soft mode with zero multipliers, or
// hard mode with lambda = 0, this returns `li` itself.
Var GeneratorObjective(Var li, Var le, Var mask, const GameConfig& config);
// Scalar form without constraint terms.
double GeneratorObjective(double li, double le, const GameConfig& config);

struct TraceRecord {
  std::size_t step = 0;
  double li = 0.0;
  double le = 0.0;
  double gap = 0.0;
  std::optional<double> dev_acc;
  double sparsity = 0.0;
  double objective = 0.0;
};

std::string TraceLine(const TraceRecord& record);

// Parameter checksums taken around the two phases of one step.
struct PhaseChecksums {
  std::uint64_t g_before = 0, g_mid = 0, g_after = 0;
  std::uint64_t fi_before = 0, fi_mid = 0, fi_after = 0;
  std::uint64_t fe_before = 0, fe_mid = 0, fe_after = 0;
};

class GameTrainer {
 public:
  // Training rows are the corpus train split; dev rows the val split.
  GameTrainer(GameModel& model, const Corpus& corpus);

  // One alternating step. Throws DivergenceError on a non-finite loss.
  TraceRecord Step(PhaseChecksums* checksums = nullptr);

  // Runs config().steps steps, calling `on_record` after each.
  std::vector<TraceRecord> Run(
      const std::function<void(const TraceRecord&)>& on_record = {});

  std::size_t step() const { return step_; }
  std::optional<double> best_dev_acc() const { return best_dev_acc_; }
  std::size_t best_step() const { return best_step_; }

 private:
  Batch NextBatch();

  GameModel& model_;
  std::vector<const Example*> train_;
  std::vector<const Example*> dev_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  AdamState adam_g_, adam_fi_, adam_fe_;
  std::size_t step_ = 0;
  double last_li_ = 0.0, last_le_ = 0.0;
  std::optional<double> dev_acc_;
  std::optional<double> best_dev_acc_;
  std::size_t best_step_ = 0;
  std::vector<Array> best_params_;
};

struct Prediction {
  std::vector<int> labels;
  std::vector<double> prob_pos;
  std::vector<std::vector<std::uint8_t>> masks;
};

Prediction Predict(GameModel& model, const std::vector<const Example*>& examples);

double Accuracy(const Prediction& prediction,
                const std::vector<const Example*>& examples);

// Mean L_i and L_e over labelled rows with env ids, using prediction masks.
struct HeldOutLosses {
  double li = 0.0;
  double le = 0.0;
};
HeldOutLosses EvaluateLosses(GameModel& model,
                             const std::vector<const Example*>& examples);

// Checkpoint with the config and model dimensions embedded as JSON.
void SaveModel(const std::string& path, const GameModel& model);
GameModel LoadModel(const std::string& path);

}  // namespace invrat

#endif  // INVRAT_GAME_HPP_
