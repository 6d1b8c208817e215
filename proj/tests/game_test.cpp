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

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "invrat/adam.hpp"
#include "invrat/datagen.hpp"
#include "invrat/error.hpp"
#include "invrat/game.hpp"
#include "invrat/rng.hpp"

namespace invrat {
namespace {

Corpus SmallBiasCorpus(std::uint64_t seed = 1) {
  BiasInjectionConfig cfg;
  cfg.train_per_env = 200;
  cfg.holdout_per_env = 50;
  cfg.val_count = 100;
  cfg.test_per_env = 100;
  cfg.seed = seed;
  return GenBiasCorpus(cfg);
}

GameConfig SmallConfig() {
  GameConfig c;
  c.embed_dim = 8;
  c.hidden_dim = 8;
  c.steps = 20;
  c.batch_size = 16;
  c.eval_every = 10;
  return c;
}

Batch FirstRows(const Corpus& c, std::size_t n) {
  auto rows = c.split(Split::kTrain);
  rows.resize(n);
  return Batch::From(rows, c.seq_len);
}

Array Scores(std::size_t n, std::size_t peak) {
  Array s({1, n});
  for (std::size_t i = 0; i < n; ++i) s[i] = -static_cast<double>(i);
  s[peak] = 10.0;
  return s;
}

std::vector<std::size_t> Ones(const Array& row) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] == 1.0) out.push_back(i);
  }
  return out;
}

TEST_SUITE("game") {
  TEST_CASE("hard window: peak inside, peak at the end, ties") {
    CHECK(Ones(HardWindowMask(Scores(10, 4), 3)) == std::vector<std::size_t>{4, 5, 6});
    CHECK(Ones(HardWindowMask(Scores(10, 9), 3)) == std::vector<std::size_t>{7, 8, 9});
    Array flat({1, 6}, 0.0);
    CHECK(Ones(HardWindowMask(flat, 2)) == std::vector<std::size_t>{0, 1});
    CHECK_THROWS_AS(HardWindowMask(flat, 7), InvalidArgument);
    CHECK_THROWS_AS(HardWindowMask(flat, 0), InvalidArgument);
  }

  TEST_CASE("hard window: exhaustive small-N enumeration") {
    for (std::size_t n = 1; n <= 7; ++n) {
      for (std::size_t l = 1; l <= n; ++l) {
        for (std::size_t peak = 0; peak < n; ++peak) {
          const auto ones = Ones(HardWindowMask(Scores(n, peak), l));
          REQUIRE(ones.size() == l);
          const std::size_t start = std::min(peak, n - l);
          for (std::size_t k = 0; k < l; ++k) CHECK(ones[k] == start + k);
        }
      }
    }
  }

  TEST_CASE("soft mode with scores at minus infinity selects nothing") {
    const Corpus c = SmallBiasCorpus();
    GameModel m(SmallConfig(), c.vocab.size(), c.seq_len, c.num_envs);
    m.params().get("g.score.b").value[0] = -std::numeric_limits<double>::infinity();
    const Batch b = FirstRows(c, 8);
    Rng rng(1);
    Tape tape;
    const MaskOutput out = GenerateMask(tape, m, b, &rng);
    for (double v : out.hard.data()) CHECK(v == 0.0);
    for (double v : PredictionMask(m, b).data()) CHECK(v == 0.0);
  }

  TEST_CASE("straight-through mask forward equals the hard mask") {
    const Corpus c = SmallBiasCorpus();
    for (auto mode : {ConstraintMode::kSoft, ConstraintMode::kHard}) {
      GameConfig cfg = SmallConfig();
      cfg.constraint_mode = mode;
      GameModel m(cfg, c.vocab.size(), c.seq_len, c.num_envs);
      Rng rng(2);
      Tape tape;
      const MaskOutput out = GenerateMask(tape, m, FirstRows(c, 8), &rng);
      CHECK(out.mask.value() == out.hard);
    }
  }

  TEST_CASE("untrained predictors start at log 2") {
    const Corpus c = SmallBiasCorpus();
    GameModel m(SmallConfig(), c.vocab.size(), c.seq_len, c.num_envs);
    const Batch b = FirstRows(c, 32);
    Tape tape;
    const PredictorLosses l =
        ComputePredictorLosses(tape, m, b, tape.constant(Array({b.size, b.seq_len}, 1.0)));
    CHECK(l.li.value().item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(l.le.value().item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }

  TEST_CASE("all-zero mask cannot beat the best constant predictor") {
    const Corpus c = SmallBiasCorpus();
    GameConfig cfg = SmallConfig();
    cfg.steps = 50;
    GameModel m(cfg, c.vocab.size(), c.seq_len, c.num_envs);
    GameTrainer(m, c).Run();
    const Batch b = FirstRows(c, 200);
    double pos = 0;
    for (int y : b.labels) pos += y;
    const double p = pos / b.size;
    const double h = -(p * std::log(p) + (1 - p) * std::log(1 - p));
    Tape tape;
    const PredictorLosses l =
        ComputePredictorLosses(tape, m, b, tape.constant(Array({b.size, b.seq_len}, 0.0)));
    CHECK(l.li.value().item() >= h - 1e-12);
  }

  TEST_CASE("environment-aware predictor exploits an env-determined label") {
    // Env 0 is all Y=1, env 1 all Y=0; tokens are pure noise.
    Corpus c;
    c.kind = "synthetic";
    c.seq_len = 6;
    c.num_envs = 2;
    for (int i = 0; i < 8; ++i) c.vocab.push_back("t" + std::to_string(i));
    Rng rng(11);
    for (int i = 0; i < 400; ++i) {
      Example ex;
      ex.env = i % 2;
      ex.label = ex.env == 0 ? 1 : 0;
      for (std::size_t n = 0; n < c.seq_len; ++n) ex.tokens.push_back(static_cast<int>(rng.below(8)));
      ex.truth.assign(c.seq_len, 0);
      ex.bias.assign(c.seq_len, 0);
      c.examples.push_back(ex);
    }
    GameModel m(SmallConfig(), c.vocab.size(), c.seq_len, c.num_envs);
    AdamState fi({1e-2}, m.params().with_prefix("fi."));
    AdamState fe({1e-2}, m.params().with_prefix("fe."));
    const Batch b = Batch::From(c.split(Split::kTrain), c.seq_len);
    const Array ones({b.size, b.seq_len}, 1.0);
    double li = 0, le = 0;
    for (int step = 0; step < 200; ++step) {
      Tape tape;
      const PredictorLosses l = ComputePredictorLosses(tape, m, b, tape.constant(ones));
      li = l.li.value().item();
      le = l.le.value().item();
      m.params().zero_grad();
      tape.backward(l.li);
      fi.step();
      m.params().zero_grad();
      tape.backward(l.le);
      fe.step();
    }
    CHECK(le < li);
    CHECK(le < 0.05);
  }

  TEST_CASE("perturbing env ids never changes f_i, only f_e") {
    const Corpus c = SmallBiasCorpus();
    GameModel m(SmallConfig(), c.vocab.size(), c.seq_len, c.num_envs);
    GameTrainer(m, c).Run();  // non-trivial weights
    Batch b = FirstRows(c, 16);
    const Array mask({b.size, b.seq_len}, 1.0);
    Tape t1;
    const Array fi_a = PredictorLogitsI(t1, m, b, t1.constant(mask)).value();
    const Array fe_a = PredictorLogitsE(t1, m, b, t1.constant(mask)).value();
    for (int& e : b.envs) e = 1 - e;
    Tape t2;
    CHECK(PredictorLogitsI(t2, m, b, t2.constant(mask)).value() == fi_a);
    CHECK_FALSE(PredictorLogitsE(t2, m, b, t2.constant(mask)).value() == fe_a);
  }

  TEST_CASE("lambda 0 reproduces the two-player generator bit for bit") {
    const Corpus c = SmallBiasCorpus();
    GameConfig three = SmallConfig();
    three.lambda_inv = 0.0;
    three.eval_every = 0;
    GameConfig two = three;
    two.two_player = true;
    GameModel m3(three, c.vocab.size(), c.seq_len, c.num_envs);
    GameModel m2(two, c.vocab.size(), c.seq_len, c.num_envs);
    const auto t3 = GameTrainer(m3, c).Run();
    const auto t2 = GameTrainer(m2, c).Run();
    CHECK(m3.params().checksum("g.") == m2.params().checksum("g."));
    CHECK(m3.params().checksum("fi.") == m2.params().checksum("fi."));
    for (std::size_t i = 0; i < t3.size(); ++i) {
      CHECK(t3[i].objective == t2[i].objective);
      CHECK(t3[i].li == t2[i].li);
    }
  }

  TEST_CASE("phase checksums: predictor and generator updates never cross") {
    const Corpus c = SmallBiasCorpus();
    GameConfig cfg = SmallConfig();
    cfg.lambda_inv = 5.0;
    GameModel m(cfg, c.vocab.size(), c.seq_len, c.num_envs);
    GameTrainer trainer(m, c);
    for (int i = 0; i < 5; ++i) {
      PhaseChecksums k;
      trainer.Step(&k);
      CHECK(k.g_before == k.g_mid);
      CHECK(k.fi_mid == k.fi_after);
      CHECK(k.fe_mid == k.fe_after);
      CHECK(k.fi_before != k.fi_mid);
      CHECK(k.fe_before != k.fe_mid);
      CHECK(k.g_mid != k.g_after);
    }
  }

  TEST_CASE("generator score weights receive gradient through the mask") {
    const Corpus c = SmallBiasCorpus();
    for (auto mode : {ConstraintMode::kSoft, ConstraintMode::kHard}) {
      GameConfig cfg = SmallConfig();
      cfg.constraint_mode = mode;
      cfg.lambda_inv = 2.0;
      cfg.h_kind = HKind::kIdentity;
      GameModel m(cfg, c.vocab.size(), c.seq_len, c.num_envs);
      GameTrainer(m, c).Run();
      const Batch b = FirstRows(c, 16);
      Rng rng(4);
      Tape tape;
      const MaskOutput mask = GenerateMask(tape, m, b, &rng);
      const PredictorLosses l = ComputePredictorLosses(tape, m, b, mask.mask);
      m.params().zero_grad();
      tape.backward(GeneratorObjective(l.li, l.le, mask.mask, cfg));
      double norm = 0;
      for (double g : m.params().get("g.score.w").grad.data()) norm += g * g;
      CHECK(norm > 0.0);
    }
  }

  TEST_CASE("h properties") {
    for (double t = -3.0; t <= 0.0; t += 0.25) CHECK(ApplyH(HKind::kRelu, t) == 0.0);
    for (double t = 0.0; t < 3.0; t += 0.25) {
      CHECK(ApplyH(HKind::kRelu, t + 0.25) > ApplyH(HKind::kRelu, t));
    }
    for (double t = -3.0; t < 3.0; t += 0.25) {
      CHECK(ApplyH(HKind::kIdentity, t + 0.25) > ApplyH(HKind::kIdentity, t));
    }
  }

  TEST_CASE("generator objective arithmetic") {
    GameConfig cfg;
    cfg.lambda_inv = 1.0;
    cfg.h_kind = HKind::kIdentity;
    CHECK(GeneratorObjective(0.8, 0.5, cfg) == doctest::Approx(1.1));
    cfg.h_kind = HKind::kRelu;
    CHECK(GeneratorObjective(0.6, 0.6, cfg) == 0.6);

    Tape tape;
    const Var li = tape.constant(Array::Scalar(0.8));
    const Var le = tape.constant(Array::Scalar(0.5));
    const Var mask = tape.constant(Array({1, 4}, {1, 0, 0, 1}));
    GameConfig mmi;
    mmi.lambda_inv = 0.0;
    mmi.mu1 = 0.0;
    mmi.mu2 = 0.0;
    CHECK(GeneratorObjective(li, le, mask, mmi).index() == li.index());
    GameConfig soft;
    soft.lambda_inv = 1.0;
    soft.h_kind = HKind::kIdentity;
    soft.mu1 = 2.0;
    soft.alpha_sparsity = 0.25;
    soft.mu2 = 0.5;
    // 0.8 + 0.3 + 2 |0.5 - 0.25| + 0.5 * 3 * mean(|diffs|) = 1.1 + 0.5 + 0.5 * 2
    CHECK(GeneratorObjective(li, le, mask, soft).value().item() == doctest::Approx(2.6));
    GameConfig hard = soft;
    hard.constraint_mode = ConstraintMode::kHard;
    CHECK(GeneratorObjective(li, le, mask, hard).value().item() == doctest::Approx(1.1));
  }

  TEST_CASE("config validation and JSON round trip") {
    GameConfig cfg;
    cfg.constraint_mode = ConstraintMode::kHard;
    cfg.rationale_len = 25;
    CHECK_THROWS_AS(cfg.Validate(20), InvalidArgument);
    GameConfig two;
    two.two_player = true;
    two.lambda_inv = 1.0;
    CHECK_THROWS_AS(two.Validate(20), InvalidArgument);
    GameConfig neg;
    neg.lambda_inv = -1.0;
    CHECK_THROWS_AS(neg.Validate(20), InvalidArgument);

    GameConfig a;
    a.lambda_inv = 4.0;
    a.h_kind = HKind::kIdentity;
    a.constraint_mode = ConstraintMode::kHard;
    a.rationale_len = 5;
    a.seed = 99;
    const GameConfig b = GameConfigFromJson(GameConfigToJson(a));
    CHECK(GameConfigToJson(b) == GameConfigToJson(a));
    CHECK_THROWS_AS(GameConfigFromJson("{\"lamda\": 1}"), InvalidArgument);
    CHECK_THROWS_AS(GameConfigFromJson("{\"h\": \"square\"}"), InvalidArgument);
    CHECK_THROWS_AS(GameConfigFromJson("{"), ParseError);
  }

  TEST_CASE("training needs two environments") {
    Corpus c = SmallBiasCorpus();
    for (Example& ex : c.examples) {
      if (ex.env == 1) ex.env = 0;
    }
    GameModel m(SmallConfig(), c.vocab.size(), c.seq_len, c.num_envs);
    CHECK_THROWS_AS(GameTrainer(m, c), InvalidArgument);
  }

  TEST_CASE("a non-finite loss aborts with the step and last finite losses") {
    const Corpus c = SmallBiasCorpus();
    GameModel m(SmallConfig(), c.vocab.size(), c.seq_len, c.num_envs);
    GameTrainer trainer(m, c);
    trainer.Step();
    trainer.Step();
    m.params().get("fi.out.b").value[0] = std::nan("");
    try {
      trainer.Step();
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(e.step() == 3);
      CHECK(std::isfinite(e.last_li()));
      CHECK(std::isfinite(e.last_le()));
    }
  }

  TEST_CASE("training is deterministic under a fixed seed") {
    const Corpus c = SmallBiasCorpus();
    auto run = [&] {
      GameModel m(SmallConfig(), c.vocab.size(), c.seq_len, c.num_envs);
      std::string trace;
      for (const TraceRecord& r : GameTrainer(m, c).Run()) trace += TraceLine(r) + "\n";
      return trace;
    };
    CHECK(run() == run());
  }

  TEST_CASE("prediction: shapes, hard-mode lengths, above-majority after training") {
    const Corpus c = SmallBiasCorpus();
    GameConfig cfg = SmallConfig();
    cfg.constraint_mode = ConstraintMode::kHard;
    cfg.rationale_len = 4;
    GameModel untrained(cfg, c.vocab.size(), c.seq_len, c.num_envs);
    const auto rows = c.split(Split::kTest);
    const Prediction p = Predict(untrained, rows);
    REQUIRE(p.labels.size() == rows.size());
    for (const auto& m : p.masks) {
      REQUIRE(m.size() == c.seq_len);
      int ones = 0;
      for (auto v : m) ones += v;
      CHECK(ones == 4);
    }

    GameConfig soft = SmallConfig();
    soft.steps = 300;
    GameModel trained(soft, c.vocab.size(), c.seq_len, c.num_envs);
    GameTrainer(trained, c).Run();
    const auto train = c.split(Split::kTrain);
    double pos = 0;
    for (const Example* ex : train) pos += ex->label;
    const double majority = std::max(pos, train.size() - pos) / train.size();
    CHECK(Accuracy(Predict(trained, train), train) > majority);
  }

  TEST_CASE("model checkpoint round trip preserves predictions") {
    const Corpus c = SmallBiasCorpus();
    GameModel m(SmallConfig(), c.vocab.size(), c.seq_len, c.num_envs);
    GameTrainer(m, c).Run();
    const std::string path =
        (std::filesystem::temp_directory_path() / "invrat_game_test.ckpt").string();
    SaveModel(path, m);
    GameModel back = LoadModel(path);
    std::filesystem::remove(path);
    CHECK(GameConfigToJson(back.config()) == GameConfigToJson(m.config()));
    const auto rows = c.split(Split::kTest);
    const Prediction a = Predict(m, rows), b = Predict(back, rows);
    CHECK(a.labels == b.labels);
    CHECK(a.masks == b.masks);
    CHECK(a.prob_pos == b.prob_pos);
  }
}

}  // namespace
}  // namespace invrat
