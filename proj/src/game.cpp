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

#include "invrat/game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "invrat/checkpoint.hpp"
#include "invrat/error.hpp"
#include "json.hpp"

namespace invrat {
namespace {

using json = nlohmann::json;

constexpr std::size_t kEvalBatch = 256;

void GlorotInit(Parameter& p, Rng& rng) {
  const Shape& s = p.value.shape();
  const double fan = static_cast<double>(s[0] + (s.size() > 1 ? s[1] : 0));
  const double limit = std::sqrt(6.0 / fan);
  for (double& v : p.value.data()) v = rng.uniform(-limit, limit);
}

void UniformInit(Parameter& p, Rng& rng, double limit) {
  for (double& v : p.value.data()) v = rng.uniform(-limit, limit);
}

std::vector<std::size_t> Indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

void Shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

Var GeneratorScores(Tape& tape, GameModel& model, const Batch& batch) {
  ParameterStore& p = model.params();
  const Var emb = Embed(tape.parameter(p.get("g.embed")), batch.tokens,
                        {batch.size, batch.seq_len});
  const Var ctx = Concat(Concat(Shift(emb, -1), emb), Shift(emb, 1));
  const Var hidden = Tanh(Affine(tape.parameter(p.get("g.hidden.w")),
                                 tape.parameter(p.get("g.hidden.b")), ctx));
  const Var score = Affine(tape.parameter(p.get("g.score.w")),
                           tape.parameter(p.get("g.score.b")), hidden);
  return Reshape(score, {batch.size, batch.seq_len});
}

Var PooledTokens(Tape& tape, GameModel& model, const std::string& prefix,
                 const Batch& batch, Var mask) {
  const Var emb = Embed(tape.parameter(model.params().get(prefix + "embed")),
                        batch.tokens, {batch.size, batch.seq_len});
  return MeanPoolMasked(emb, mask);
}

Var Head(Tape& tape, GameModel& model, const std::string& prefix, Var features) {
  ParameterStore& p = model.params();
  const Var hidden = Tanh(Affine(tape.parameter(p.get(prefix + "hidden.w")),
                                 tape.parameter(p.get(prefix + "hidden.b")), features));
  return Affine(tape.parameter(p.get(prefix + "out.w")),
                tape.parameter(p.get(prefix + "out.b")), hidden);
}

bool Finite(double v) { return std::isfinite(v); }

}  // namespace

double ApplyH(HKind kind, double t) {
  return kind == HKind::kRelu ? std::max(0.0, t) : t;
}

std::string_view HKindName(HKind kind) {
  return kind == HKind::kRelu ? "relu" : "identity";
}

std::string_view ConstraintModeName(ConstraintMode mode) {
  return mode == ConstraintMode::kHard ? "hard" : "soft";
}

void GameConfig::Validate(std::size_t seq_len) const {
  if (!(lambda_inv >= 0.0) || !Finite(lambda_inv)) {
    throw InvalidArgument("lambda must be a finite value >= 0");
  }
  if (!(mu1 >= 0.0) || !(mu2 >= 0.0)) throw InvalidArgument("mu1 and mu2 must be >= 0");
  if (!(alpha_sparsity >= 0.0 && alpha_sparsity <= 1.0)) {
    throw InvalidArgument("alpha_sparsity must lie in [0, 1]");
  }
  if (constraint_mode == ConstraintMode::kHard &&
      (rationale_len < 1 || rationale_len > seq_len)) {
    throw InvalidArgument("rationale_len " + std::to_string(rationale_len) +
                          " does not fit sequences of length " + std::to_string(seq_len));
  }
  if (embed_dim == 0 || hidden_dim == 0) throw InvalidArgument("layer sizes must be positive");
  if (batch_size == 0) throw InvalidArgument("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (!(generator_lr >= 0.0)) throw InvalidArgument("generator_lr must be >= 0");
  if (two_player && lambda_inv != 0.0) {
    throw InvalidArgument("two-player mode has no f_e; lambda must be 0");
  }
}

std::string GameConfigToJson(const GameConfig& c) {
  return json{{"lambda", c.lambda_inv},
              {"h", HKindName(c.h_kind)},
              {"constraint", ConstraintModeName(c.constraint_mode)},
              {"mu1", c.mu1},
              {"mu2", c.mu2},
              {"alpha_sparsity", c.alpha_sparsity},
              {"rationale_len", c.rationale_len},
              {"embed_dim", c.embed_dim},
              {"hidden_dim", c.hidden_dim},
              {"steps", c.steps},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"generator_lr", c.generator_lr},
              {"seed", c.seed},
              {"two_player", c.two_player},
              {"eval_every", c.eval_every},
              {"keep_best", c.keep_best}}
      .dump();
}

GameConfig GameConfigFromJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("game config: ") + e.what(), 0);
  }
  if (!doc.is_object()) throw ParseError("game config: expected an object", 0);
  GameConfig c;
  for (const auto& [key, v] : doc.items()) {
    try {
      if (key == "lambda") {
        c.lambda_inv = v.get<double>();
      } else if (key == "h") {
        const auto s = v.get<std::string>();
        if (s != "relu" && s != "identity") throw InvalidArgument("h must be relu or identity");
        c.h_kind = s == "relu" ? HKind::kRelu : HKind::kIdentity;
      } else if (key == "constraint") {
        const auto s = v.get<std::string>();
        if (s != "soft" && s != "hard") throw InvalidArgument("constraint must be soft or hard");
        c.constraint_mode = s == "hard" ? ConstraintMode::kHard : ConstraintMode::kSoft;
      } else if (key == "mu1") {
        c.mu1 = v.get<double>();
      } else if (key == "mu2") {
        c.mu2 = v.get<double>();
      } else if (key == "alpha_sparsity") {
        c.alpha_sparsity = v.get<double>();
      } else if (key == "rationale_len") {
        c.rationale_len = v.get<std::size_t>();
      } else if (key == "embed_dim") {
        c.embed_dim = v.get<std::size_t>();
      } else if (key == "hidden_dim") {
        c.hidden_dim = v.get<std::size_t>();
      } else if (key == "steps") {
        c.steps = v.get<std::size_t>();
      } else if (key == "batch_size") {
        c.batch_size = v.get<std::size_t>();
      } else if (key == "learning_rate") {
        c.learning_rate = v.get<double>();
      } else if (key == "generator_lr") {
        c.generator_lr = v.get<double>();
      } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else if (key == "two_player") {
        c.two_player = v.get<bool>();
      } else if (key == "eval_every") {
        c.eval_every = v.get<std::size_t>();
      } else if (key == "keep_best") {
        c.keep_best = v.get<bool>();
      } else {
        throw InvalidArgument("game config: unknown key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw InvalidArgument("game config: bad value for '" + key + "': " + e.what());
    }
  }
  return c;
}

Batch Batch::From(const std::vector<const Example*>& examples, std::size_t seq_len) {
  Batch b;
  b.size = examples.size();
  b.seq_len = seq_len;
  b.tokens.reserve(b.size * seq_len);
  for (const Example* ex : examples) {
    if (ex->tokens.size() != seq_len) {
      throw ShapeError("example of length " + std::to_string(ex->tokens.size()) +
                       " in a batch of length " + std::to_string(seq_len));
    }
    b.tokens.insert(b.tokens.end(), ex->tokens.begin(), ex->tokens.end());
    b.labels.push_back(ex->label);
    b.envs.push_back(ex->env);
  }
  return b;
}

GameModel::GameModel(GameConfig config, std::size_t vocab_size, std::size_t seq_len,
                     int num_envs)
    : config_(std::move(config)),
      vocab_size_(vocab_size),
      seq_len_(seq_len),
      num_envs_(num_envs) {
  config_.Validate(seq_len);
  if (vocab_size == 0) throw InvalidArgument("empty vocabulary");
  if (num_envs < 1 && !config_.two_player) {
    throw InvalidArgument("the environment-aware predictor needs >= 1 environment");
  }
  const std::size_t d = config_.embed_dim, h = config_.hidden_dim;
  Rng rng(Rng::derive(config_.seed, 0x6d6f64656c));

  UniformInit(params_.add("g.embed", {vocab_size, d}), rng, 0.5);
  GlorotInit(params_.add("g.hidden.w", {h, 3 * d}), rng);
  params_.add("g.hidden.b", {h});
  GlorotInit(params_.add("g.score.w", {1, h}), rng);
  params_.add("g.score.b", {1});

  // Output layers start at zero so both predictors begin at log 2.
  UniformInit(params_.add("fi.embed", {vocab_size, d}), rng, 0.5);
  GlorotInit(params_.add("fi.hidden.w", {h, d}), rng);
  params_.add("fi.hidden.b", {h});
  params_.add("fi.out.w", {2, h});
  params_.add("fi.out.b", {2});

  if (!config_.two_player) {
    const std::size_t e = static_cast<std::size_t>(num_envs);
    UniformInit(params_.add("fe.embed", {vocab_size, d}), rng, 0.5);
    GlorotInit(params_.add("fe.hidden.w", {h, d + e}), rng);
    params_.add("fe.hidden.b", {h});
    params_.add("fe.out.w", {2, h});
    params_.add("fe.out.b", {2});
  }
}

Array HardWindowMask(const Array& scores, std::size_t l) {
  if (scores.rank() != 2) {
    throw ShapeError("hard mask: scores must be [B, N], got " + ShapeString(scores.shape()));
  }
  const std::size_t rows = scores.dim(0), n = scores.dim(1);
  if (l < 1 || l > n) {
    throw InvalidArgument("rationale length " + std::to_string(l) + " outside [1, " +
                          std::to_string(n) + "]");
  }
  Array mask(scores.shape());
  for (std::size_t b = 0; b < rows; ++b) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (scores[b * n + i] > scores[b * n + best]) best = i;
    }
    const std::size_t start = std::min(best, n - l);
    for (std::size_t i = start; i < start + l; ++i) mask[b * n + i] = 1.0;
  }
  return mask;
}

MaskOutput GenerateMask(Tape& tape, GameModel& model, const Batch& batch, Rng* rng,
                        const Array* reuse_hard) {
  const GameConfig& cfg = model.config();
  MaskOutput out;
  out.scores = GeneratorScores(tape, model, batch);
  if (cfg.constraint_mode == ConstraintMode::kHard) {
    out.hard = HardWindowMask(out.scores.value(), cfg.rationale_len);
    out.surrogate = CausalConvAllOnes(Softmax(out.scores), cfg.rationale_len);
  } else {
    out.surrogate = Sigmoid(out.scores);
    if (reuse_hard != nullptr) {
      out.hard = *reuse_hard;
    } else {
      if (rng == nullptr) throw InvalidArgument("soft-mode sampling needs an rng");
      const Array& p = out.surrogate.value();
      out.hard = Array(p.shape());
      for (std::size_t i = 0; i < p.size(); ++i) out.hard[i] = rng->uniform() < p[i] ? 1.0 : 0.0;
    }
  }
  out.mask = StraightThrough(out.hard, out.surrogate);
  return out;
}

Array PredictionMask(GameModel& model, const Batch& batch) {
  Tape tape;
  const Var scores = GeneratorScores(tape, model, batch);
  if (model.config().constraint_mode == ConstraintMode::kHard) {
    return HardWindowMask(scores.value(), model.config().rationale_len);
  }
  Array mask(scores.shape());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = scores.value()[i] >= 0.0 ? 1.0 : 0.0;
  return mask;
}

Var PredictorLogitsI(Tape& tape, GameModel& model, const Batch& batch, Var mask) {
  return Head(tape, model, "fi.", PooledTokens(tape, model, "fi.", batch, mask));
}

Var PredictorLogitsE(Tape& tape, GameModel& model, const Batch& batch, Var mask) {
  if (model.config().two_player) throw InvalidArgument("two-player model has no f_e");
  const std::size_t e = static_cast<std::size_t>(model.num_envs());
  Array onehot({batch.size, e});
  for (std::size_t b = 0; b < batch.size; ++b) {
    const int env = batch.envs[b];
    if (env < 0 || env >= model.num_envs()) {
      throw InvalidArgument("f_e needs an environment id for every row");
    }
    onehot[b * e + env] = 1.0;
  }
  const Var pooled = PooledTokens(tape, model, "fe.", batch, mask);
  return Head(tape, model, "fe.", Concat(pooled, tape.constant(std::move(onehot))));
}

PredictorLosses ComputePredictorLosses(Tape& tape, GameModel& model, const Batch& batch,
                                       Var mask) {
  PredictorLosses out;
  out.li = SoftmaxCrossEntropy(PredictorLogitsI(tape, model, batch, mask), batch.labels);
  if (!model.config().two_player) {
    out.le = SoftmaxCrossEntropy(PredictorLogitsE(tape, model, batch, mask), batch.labels);
  }
  return out;
}

Var GeneratorObjective(Var li, Var le, Var mask, const GameConfig& config) {
  Var obj = li;
  if (config.lambda_inv != 0.0) {
    const Var diff = Sub(li, le);
    const Var h = config.h_kind == HKind::kRelu ? Relu(diff) : diff;
    obj = Add(obj, Scale(h, config.lambda_inv));
  }
  if (config.constraint_mode == ConstraintMode::kSoft) {
    if (config.mu1 != 0.0) {
      obj = Add(obj, Scale(Abs(AddScalar(Mean(mask), -config.alpha_sparsity)), config.mu1));
    }
    const std::size_t n = mask.shape().back();
    if (config.mu2 != 0.0 && n > 1) {
      // mean over rows of sum_n |m_n - m_{n-1}|
      obj = Add(obj, Scale(Mean(Abs(AdjacentDiff(mask))),
                           config.mu2 * static_cast<double>(n - 1)));
    }
  }
  return obj;
}

double GeneratorObjective(double li, double le, const GameConfig& config) {
  return li + config.lambda_inv * ApplyH(config.h_kind, li - le);
}

std::string TraceLine(const TraceRecord& r) {
  json rec = {{"step", r.step},
              {"li", r.li},
              {"le", r.le},
              {"gap", r.gap},
              {"dev_acc", r.dev_acc ? json(*r.dev_acc) : json(nullptr)},
              {"sparsity", r.sparsity},
              {"objective", r.objective}};
  return rec.dump();
}

GameTrainer::GameTrainer(GameModel& model, const Corpus& corpus)
    : model_(model),
      train_(corpus.split(Split::kTrain)),
      dev_(corpus.split(Split::kVal)),
      rng_(Rng::derive(model.config().seed, 0x747261696e)),
      adam_g_({model.config().generator_lr > 0.0 ? model.config().generator_lr
                                                 : model.config().learning_rate},
              model.params().with_prefix("g.")),
      adam_fi_({model.config().learning_rate}, model.params().with_prefix("fi.")),
      adam_fe_({model.config().learning_rate}, model.params().with_prefix("fe.")) {
  if (train_.empty()) throw InvalidArgument("corpus has no training rows");
  if (corpus.seq_len != model.seq_len()) {
    throw ShapeError("corpus seq_len " + std::to_string(corpus.seq_len) +
                     " differs from model seq_len " + std::to_string(model.seq_len()));
  }
  if (corpus.vocab.size() > model.vocab_size()) {
    throw InvalidArgument("corpus vocabulary is larger than the model's");
  }
  if (!model.config().two_player) {
    int envs_seen = 0;
    std::vector<bool> seen(model.num_envs(), false);
    for (const Example* ex : train_) {
      if (ex->env < 0 || ex->env >= model.num_envs()) {
        throw InvalidArgument("training row with missing or out-of-range env id");
      }
      if (!seen[ex->env]) ++envs_seen;
      seen[ex->env] = true;
    }
    if (envs_seen < 2) throw InvalidArgument("training needs at least two environments");
  }
  order_ = Indices(train_.size());
  Shuffle(order_, rng_);
}

Batch GameTrainer::NextBatch() {
  const std::size_t b = std::min(model_.config().batch_size, train_.size());
  std::vector<const Example*> rows;
  rows.reserve(b);
  while (rows.size() < b) {
    if (cursor_ == order_.size()) {
      Shuffle(order_, rng_);
      cursor_ = 0;
    }
    rows.push_back(train_[order_[cursor_++]]);
  }
  return Batch::From(rows, model_.seq_len());
}

TraceRecord GameTrainer::Step(PhaseChecksums* checksums) {
  const GameConfig& cfg = model_.config();
  ParameterStore& params = model_.params();
  const bool three = !cfg.two_player;
  if (checksums) {
    checksums->g_before = params.checksum("g.");
    checksums->fi_before = params.checksum("fi.");
    checksums->fe_before = params.checksum("fe.");
  }
  const Batch batch = NextBatch();

  // Phase A: predictors descend their own losses on the sampled mask.
  Array hard;
  TraceRecord rec;
  rec.step = step_ + 1;
  {
    Tape tape;
    const MaskOutput m = GenerateMask(tape, model_, batch, &rng_);
    hard = m.hard;
    const PredictorLosses losses = ComputePredictorLosses(tape, model_, batch, m.mask);
    rec.li = losses.li.value().item();
    rec.le = three ? losses.le.value().item() : rec.li;
    if (!Finite(rec.li) || !Finite(rec.le)) {
      throw DivergenceError("non-finite predictor loss at step " + std::to_string(rec.step),
                            static_cast<long>(rec.step), last_li_, last_le_);
    }
    params.zero_grad();
    tape.backward(losses.li);
    adam_fi_.step();
    if (three) {
      params.zero_grad();
      tape.backward(losses.le);
      adam_fe_.step();
    }
  }
  if (checksums) {
    checksums->g_mid = params.checksum("g.");
    checksums->fi_mid = params.checksum("fi.");
    checksums->fe_mid = params.checksum("fe.");
  }

  // Phase B: generator step against the updated, frozen predictors.
  {
    Tape tape;
    const MaskOutput m = GenerateMask(tape, model_, batch, nullptr, &hard);
    const PredictorLosses losses = ComputePredictorLosses(tape, model_, batch, m.mask);
    const Var obj = GeneratorObjective(losses.li, losses.le, m.mask, cfg);
    rec.objective = obj.value().item();
    if (!Finite(rec.objective)) {
      throw DivergenceError("non-finite generator objective at step " +
                                std::to_string(rec.step),
                            static_cast<long>(rec.step), rec.li, rec.le);
    }
    params.zero_grad();
    tape.backward(obj);
    adam_g_.step();
  }
  if (checksums) {
    checksums->g_after = params.checksum("g.");
    checksums->fi_after = params.checksum("fi.");
    checksums->fe_after = params.checksum("fe.");
  }

  double selected = 0.0;
  for (double v : hard.data()) selected += v;
  rec.sparsity = selected / static_cast<double>(hard.size());
  rec.gap = rec.li - rec.le;
  last_li_ = rec.li;
  last_le_ = rec.le;
  ++step_;

  const bool last = step_ == cfg.steps;
  if (!dev_.empty() && cfg.eval_every > 0 && (step_ % cfg.eval_every == 0 || last)) {
    dev_acc_ = Accuracy(Predict(model_, dev_), dev_);
    if (!best_dev_acc_ || *dev_acc_ > *best_dev_acc_) {
      best_dev_acc_ = dev_acc_;
      best_step_ = step_;
      if (cfg.keep_best) {
        best_params_.clear();
        for (const Parameter& p : params.all()) best_params_.push_back(p.value);
      }
    }
  }
  rec.dev_acc = dev_acc_;
  return rec;
}

std::vector<TraceRecord> GameTrainer::Run(
    const std::function<void(const TraceRecord&)>& on_record) {
  std::vector<TraceRecord> trace;
  while (step_ < model_.config().steps) {
    trace.push_back(Step());
    if (on_record) on_record(trace.back());
  }
  if (model_.config().keep_best && !best_params_.empty()) {
    std::size_t k = 0;
    for (Parameter& p : model_.params().all()) p.value = best_params_[k++];
  }
  return trace;
}

Prediction Predict(GameModel& model, const std::vector<const Example*>& examples) {
  Prediction out;
  for (std::size_t start = 0; start < examples.size(); start += kEvalBatch) {
    const std::size_t end = std::min(examples.size(), start + kEvalBatch);
    const std::vector<const Example*> rows(examples.begin() + start, examples.begin() + end);
    const Batch batch = Batch::From(rows, model.seq_len());
    const Array mask = PredictionMask(model, batch);
    Tape tape;
    const Var logits = PredictorLogitsI(tape, model, batch, tape.constant(mask));
    const Array& z = logits.value();
    for (std::size_t b = 0; b < batch.size; ++b) {
      const double p1 = 1.0 / (1.0 + std::exp(z[2 * b] - z[2 * b + 1]));
      out.prob_pos.push_back(p1);
      out.labels.push_back(z[2 * b + 1] > z[2 * b] ? 1 : 0);
      std::vector<std::uint8_t> m(batch.seq_len);
      for (std::size_t i = 0; i < batch.seq_len; ++i) m[i] = mask[b * batch.seq_len + i] != 0.0;
      out.masks.push_back(std::move(m));
    }
  }
  return out;
}

double Accuracy(const Prediction& prediction, const std::vector<const Example*>& examples) {
  if (examples.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    correct += prediction.labels.at(i) == examples[i]->label;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

HeldOutLosses EvaluateLosses(GameModel& model, const std::vector<const Example*>& examples) {
  if (examples.empty()) throw InvalidArgument("no rows to evaluate losses on");
  HeldOutLosses out;
  double li = 0.0, le = 0.0;
  for (std::size_t start = 0; start < examples.size(); start += kEvalBatch) {
    const std::size_t end = std::min(examples.size(), start + kEvalBatch);
    const std::vector<const Example*> rows(examples.begin() + start, examples.begin() + end);
    const Batch batch = Batch::From(rows, model.seq_len());
    Tape tape;
    const Var mask = tape.constant(PredictionMask(model, batch));
    const PredictorLosses losses = ComputePredictorLosses(tape, model, batch, mask);
    const double w = static_cast<double>(batch.size);
    li += w * losses.li.value().item();
    le += w * (losses.le.valid() ? losses.le.value().item() : std::nan(""));
  }
  out.li = li / static_cast<double>(examples.size());
  out.le = le / static_cast<double>(examples.size());
  return out;
}

void SaveModel(const std::string& path, const GameModel& model) {
  const json meta = {{"game", json::parse(GameConfigToJson(model.config()))},
                     {"vocab_size", model.vocab_size()},
                     {"seq_len", model.seq_len()},
                     {"num_envs", model.num_envs()}};
  SaveCheckpoint(path, model.params(), meta.dump());
}

GameModel LoadModel(const std::string& path) {
  const Checkpoint ckpt = LoadCheckpoint(path);
  json meta;
  try {
    meta = json::parse(ckpt.config_text);
    GameModel model(GameConfigFromJson(meta.at("game").dump()),
                    meta.at("vocab_size").get<std::size_t>(),
                    meta.at("seq_len").get<std::size_t>(), meta.at("num_envs").get<int>());
    RestoreParameters(ckpt, model.params());
    return model;
  } catch (const json::exception& e) {
    throw ParseError("checkpoint config: " + std::string(e.what()), 0);
  }
}

}  // namespace invrat
