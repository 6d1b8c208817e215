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

// Acceptance checks. `invrat_acceptance <n>` runs criterion n (1-9), no
// argument runs all of them. Each criterion prints one PASS/FAIL line after
// its details; the exit status is nonzero when any criterion failed.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "invrat/datagen.hpp"
#include "invrat/error.hpp"
#include "invrat/eval.hpp"
#include "invrat/game.hpp"
#include "invrat/io.hpp"
#include "invrat/oracle.hpp"
#include "invrat/pipeline.hpp"
#include "invrat/rng.hpp"
#include "invrat/tape.hpp"

namespace invrat {
namespace {

namespace fs = std::filesystem;
using oracle::FeatureSubset;
using V = oracle::Variable;

struct Verdict {
  bool pass = true;
  std::string summary;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string Fmt(const char* format, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Oracle fixtures.

Verdict OracleFixtures() {
  Stopwatch clock;
  Verdict v;
  const oracle::JointTable toy = oracle::BuildJoint(oracle::ToyPreset(), oracle::UniformWeights(1));
  for (V x : {V::kX1, V::kX2, V::kX3}) {
    const double p = oracle::Conditional(toy, V::kY, {{x, 1}});
    std::printf("  toy P(Y=1 | X%d=1) = %.15f\n", static_cast<int>(x), p);
    v.pass &= std::abs(p - 0.9) <= 1e-12;
  }
  const oracle::JointTable shift =
      oracle::BuildJoint(oracle::ShiftPreset(), oracle::UniformWeights(2));
  struct Row {
    const char* label;
    V x;
    int value;
    double reference;
  };
  const Row rows[] = {{"P(Y=1 | X2=1, e2)", V::kX2, 1, 0.926},
                      {"P(Y=0 | X2=0, e2)", V::kX2, 0, 0.867},
                      {"P(Y=1 | X3=1, e2)", V::kX3, 1, 0.912},
                      {"P(Y=0 | X3=0, e2)", V::kX3, 0, 0.883}};
  for (const Row& r : rows) {
    const double p1 = oracle::Conditional(shift, V::kY, {{V::kE, 1}, {r.x, r.value}});
    const double p = r.value == 1 ? p1 : 1.0 - p1;
    std::printf("  %s = %.6f (reference %.3f)\n", r.label, p, r.reference);
    v.pass &= std::abs(p - r.reference) <= 5e-4;
  }
  const double t = clock.seconds();
  v.pass &= t < 1.0;
  v.summary = Fmt("fixtures within tolerance, runtime %.3f s (limit 1 s)", t);
  return v;
}

// ---------------------------------------------------------------------------
// 2. Minimax desk check.

Verdict MinimaxDeskCheck() {
  Stopwatch clock;
  const std::vector<double> grid = {0.1, 0.3, 0.5, 0.7, 0.9};
  const oracle::MinimaxReport r =
      oracle::VerifyMinimaxSaddlePoint(oracle::ShiftPreset(), oracle::UniformWeights(2), grid);
  const double t = clock.seconds();
  for (const auto& row : r.rows) {
    std::printf("  %-12s worst-case loss %.6f\n", row.subset.ToString().c_str(), row.max_loss);
  }
  Verdict v;
  v.pass = r.winner == FeatureSubset::Parse("{X1}") && r.conclusive && t < 60.0;
  v.summary = "winner " + r.winner.ToString() + (r.conclusive ? " (unique)" : " (tied)") +
              Fmt(" over %.0f adversary grid points, runtime %.2f s (limit 60 s)",
                  static_cast<double>(r.candidates), t);
  return v;
}

// ---------------------------------------------------------------------------
// 3. Invariance verdicts: {X1} invariant; {X2}, {X3} and every superset
// containing X2 or X3 not invariant.

Verdict InvarianceVerdicts() {
  const oracle::JointTable j =
      oracle::BuildJoint(oracle::ShiftPreset(), oracle::UniformWeights(2));
  const FeatureSubset x2 = FeatureSubset::Parse("{X2}");
  const FeatureSubset x3 = FeatureSubset::Parse("{X3}");
  Verdict v;
  std::vector<std::string> wrong;
  for (FeatureSubset z : FeatureSubset::PowerSet()) {
    const bool contains_noninvariant = x2.is_subset_of(z) || x3.is_subset_of(z);
    const bool is_x1 = z == FeatureSubset::Parse("{X1}");
    if (!contains_noninvariant && !is_x1) continue;
    const bool expected = is_x1;
    const bool got = oracle::IsInvariant(j, z, 1e-6);
    const double gap = oracle::ConditionalEntropy(j, z, false) - oracle::ConditionalEntropy(j, z, true);
    std::printf("  %-12s H(Y|Z)-H(Y|Z,E) = %.3e  invariant %-3s expected %s\n",
                z.ToString().c_str(), gap, got ? "yes" : "no", expected ? "yes" : "no");
    if (got != expected) wrong.push_back(z.ToString());
  }
  v.pass = wrong.empty();
  if (v.pass) {
    v.summary = "all verdicts as expected";
  } else {
    v.summary = "verdicts differ for";
    for (const std::string& s : wrong) v.summary += " " + s;
    v.summary += " (X1 blocks every path from E to Y, so these supersets are invariant)";
  }
  return v;
}

// ---------------------------------------------------------------------------
// 4. Gradient suite.

Verdict GradientSuite() {
  using testing::CheckGradients;
  using B = std::vector<Var>;
  const auto smooth = [](Rng& r) { return r.uniform(-2.0, 2.0); };
  const auto away = [](Rng& r) {
    const double x = r.uniform(0.05, 2.0);
    return r.bernoulli(0.5) ? x : -x;
  };
  const auto positive = [](Rng& r) { return r.uniform(0.1, 1.0); };
  const std::vector<int> ids = {0, 3, 3, 1, 4, 2};
  const std::vector<int> labels = {1, 0, 2, 1};
  struct Case {
    const char* name;
    std::vector<Shape> shapes;
    testing::OpBuilder op;
    std::function<double(Rng&)> sample;
    testing::OpBuilder surrogate;
  };
  const std::vector<Case> cases = {
      {"Tanh", {{3, 4}}, [](Tape&, B& x) { return Tanh(x[0]); }, smooth, {}},
      {"Sigmoid", {{3, 4}}, [](Tape&, B& x) { return Sigmoid(x[0]); }, smooth, {}},
      {"Relu", {{3, 4}}, [](Tape&, B& x) { return Relu(x[0]); }, away, {}},
      {"Abs", {{3, 4}}, [](Tape&, B& x) { return Abs(x[0]); }, away, {}},
      {"Softmax", {{2, 5}}, [](Tape&, B& x) { return Softmax(x[0]); }, smooth, {}},
      {"Scale", {{3, 4}}, [](Tape&, B& x) { return Scale(x[0], -1.7); }, smooth, {}},
      {"AddScalar", {{3, 4}}, [](Tape&, B& x) { return AddScalar(x[0], 0.3); }, smooth, {}},
      {"Mul", {{2, 3}, {2, 3}}, [](Tape&, B& x) { return Mul(x[0], x[1]); }, smooth, {}},
      {"Add", {{2, 3}, {2, 3}}, [](Tape&, B& x) { return Add(x[0], x[1]); }, smooth, {}},
      {"Sub", {{2, 3}, {2, 3}}, [](Tape&, B& x) { return Sub(x[0], x[1]); }, smooth, {}},
      {"Concat", {{2, 3, 2}, {2, 3, 4}}, [](Tape&, B& x) { return Concat(x[0], x[1]); },
       smooth, {}},
      {"Affine", {{4, 3}, {4}, {2, 5, 3}},
       [](Tape&, B& x) { return Affine(x[0], x[1], x[2]); }, smooth, {}},
      {"CausalConvAllOnes", {{2, 6}}, [](Tape&, B& x) { return CausalConvAllOnes(x[0], 3); },
       smooth, {}},
      {"Shift", {{2, 5, 3}}, [](Tape&, B& x) { return Shift(x[0], -1); }, smooth, {}},
      {"Reshape", {{2, 6}}, [](Tape&, B& x) { return Reshape(x[0], {3, 4}); }, smooth, {}},
      {"Sum", {{3, 4}}, [](Tape&, B& x) { return Sum(x[0]); }, smooth, {}},
      {"Mean", {{3, 4}}, [](Tape&, B& x) { return Mean(x[0]); }, smooth, {}},
      {"AdjacentDiff", {{3, 5}}, [](Tape&, B& x) { return AdjacentDiff(x[0]); }, smooth, {}},
      {"MeanPoolMasked", {{2, 4, 3}, {2, 4}},
       [](Tape&, B& x) { return MeanPoolMasked(x[0], x[1]); }, positive, {}},
      {"Embed", {{5, 3}}, [&](Tape&, B& x) { return Embed(x[0], ids, {2, 3}); }, smooth, {}},
      {"SoftmaxCrossEntropy", {{4, 3}},
       [&](Tape&, B& x) { return SoftmaxCrossEntropy(x[0], labels); }, smooth, {}},
      {"StraightThrough", {{2, 5}},
       [](Tape&, B& x) {
         const Var soft = Sigmoid(x[0]);
         Array hard(soft.shape());
         for (std::size_t i = 0; i < hard.size(); ++i) hard[i] = soft.value()[i] > 0.5;
         return StraightThrough(hard, soft);
       },
       smooth, [](Tape&, B& x) { return Sigmoid(x[0]); }},
  };
  Verdict v;
  double worst = 0.0;
  std::uint64_t seed = 100;
  for (const Case& c : cases) {
    const testing::GradCheckResult r =
        CheckGradients(c.shapes, c.op, c.sample, ++seed, c.surrogate, testing::kGradPoints);
    std::printf("  %-20s worst relative error %.2e %s\n", c.name, r.worst, r.pass ? "" : "FAIL");
    v.pass &= r.pass;
    worst = std::max(worst, r.worst);
  }

  // Straight-through masks from the generator carry the hard mask exactly.
  BiasInjectionConfig small;
  small.train_per_env = 100;
  small.holdout_per_env = 10;
  small.val_count = 10;
  small.test_per_env = 10;
  const Corpus corpus = GenBiasCorpus(small);
  const Batch batch = Batch::From(corpus.split(Split::kTrain), corpus.seq_len);
  bool bit_equal = true;
  for (ConstraintMode mode : {ConstraintMode::kSoft, ConstraintMode::kHard}) {
    GameConfig cfg;
    cfg.constraint_mode = mode;
    cfg.rationale_len = 4;
    GameModel model(cfg, corpus.vocab.size(), corpus.seq_len, corpus.num_envs);
    Rng rng(9);
    Tape tape;
    const MaskOutput m = GenerateMask(tape, model, batch, &rng);
    for (std::size_t i = 0; i < m.hard.size(); ++i) {
      // Bitwise, so -0.0 versus 0.0 would also count as a mismatch.
      bit_equal &= std::bit_cast<std::uint64_t>(m.hard[i]) ==
                   std::bit_cast<std::uint64_t>(m.mask.value()[i]);
    }
  }
  std::printf("  straight-through forward bit-equals the hard mask: %s\n",
              bit_equal ? "yes" : "no");
  v.pass &= bit_equal;
  v.summary = Fmt("%.0f ops at 20 points each, worst relative error %.2e (tolerance 1e-4)",
                  static_cast<double>(cases.size()), worst);
  return v;
}

// ---------------------------------------------------------------------------
// 5. Structural mask properties.

bool OneContiguousRun(const Array& mask, std::size_t row, std::size_t n, std::size_t l) {
  std::size_t ones = 0, runs = 0;
  bool prev = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = mask[row * n + i];
    if (x != 0.0 && x != 1.0) return false;
    const bool on = x == 1.0;
    ones += on;
    runs += on && !prev;
    prev = on;
  }
  return ones == l && runs == 1;
}

Verdict MaskStructure() {
  Verdict v;
  // Hard mode: 100 random models x 100 rows of a bias corpus.
  BiasInjectionConfig small;
  small.train_per_env = 50;
  small.holdout_per_env = 10;
  small.val_count = 10;
  small.test_per_env = 10;
  const Corpus corpus = GenBiasCorpus(small);
  const Batch batch = Batch::From(corpus.split(Split::kTrain), corpus.seq_len);
  Rng pick(5);
  std::size_t forwards = 0, good = 0;
  for (int model_index = 0; model_index < 100; ++model_index) {
    GameConfig cfg;
    cfg.constraint_mode = ConstraintMode::kHard;
    cfg.rationale_len = 1 + pick.below(corpus.seq_len);
    cfg.seed = 1000 + model_index;
    GameModel model(cfg, corpus.vocab.size(), corpus.seq_len, corpus.num_envs);
    Tape tape;
    const MaskOutput m = GenerateMask(tape, model, batch, nullptr);
    for (std::size_t row = 0; row < batch.size; ++row, ++forwards) {
      good += OneContiguousRun(m.mask.value(), row, corpus.seq_len, cfg.rationale_len);
    }
  }
  std::printf("  hard mode: %zu of %zu forwards hold exactly one run of l ones\n", good,
              forwards);
  v.pass = forwards == 10000 && good == forwards;

  // Soft mode: expected selection rate E[m] = mean sigmoid(s) over the
  // training rows at the end of training, for the tuned bias game.
  BiasInjectionConfig bc;
  bc.seed = 1;
  const Corpus bias = GenBiasCorpus(bc);
  const Batch train = Batch::From(bias.split(Split::kTrain), bias.seq_len);
  std::vector<double> gaps;
  for (double mu1 : {0.1, 1.0, 10.0}) {
    GameConfig cfg = BiasGameConfig();
    cfg.lambda_inv = 30.0;
    cfg.mu1 = mu1;
    cfg.seed = 1;
    cfg.keep_best = false;
    GameModel model(cfg, bias.vocab.size(), bias.seq_len, bias.num_envs);
    GameTrainer(model, bias).Run();
    Rng rng(1);
    Tape tape;
    const MaskOutput m = GenerateMask(tape, model, train, &rng);
    double mean = 0.0;
    for (double p : m.surrogate.value().data()) mean += p;
    mean /= static_cast<double>(m.surrogate.value().size());
    gaps.push_back(std::abs(mean - cfg.alpha_sparsity));
    std::printf("  soft mode mu1 %-4g mean sparsity %.4f |sparsity - alpha| %.4f\n", mu1, mean,
                gaps.back());
  }
  const bool monotone = gaps[1] < gaps[0] && gaps[2] < gaps[1];
  v.pass &= monotone;
  v.summary = Fmt("%.0f/%.0f hard forwards well formed; soft gap %.4f > %.4f", good,
                  static_cast<double>(forwards), gaps[0], gaps[1]) +
              Fmt(" > %.4f: ", gaps[2]) + (monotone ? "monotone" : "not monotone");
  return v;
}

// ---------------------------------------------------------------------------
// 6 and 8. Bias corpus, seeds 1-3, lambda 0 against the grid {10, 30}.

const std::vector<double> kGrid = {10.0, 30.0};

struct BiasRun {
  double lambda;
  EvalReport test;
};

struct BiasSeed {
  std::uint64_t seed;
  BiasRun baseline;
  std::vector<BiasRun> grid;
  // Grid entry with the lowest test bias rate.
  const BiasRun& best() const {
    return *std::min_element(grid.begin(), grid.end(), [](const BiasRun& a, const BiasRun& b) {
      return *a.test.bias_highlighted < *b.test.bias_highlighted;
    });
  }
};

const std::vector<BiasSeed>& BiasExperiments() {
  static std::optional<std::vector<BiasSeed>> cache;
  if (cache) return *cache;
  cache.emplace();
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    BiasInjectionConfig bc;
    bc.seed = seed;
    const Corpus corpus = GenBiasCorpus(bc);
    GameConfig base = BiasGameConfig();
    base.seed = seed;
    std::vector<double> lambdas = {0.0};
    lambdas.insert(lambdas.end(), kGrid.begin(), kGrid.end());
    Stopwatch clock;
    std::vector<TrainedRun> runs = TrainGrid(corpus, base, lambdas, "");
    BiasSeed s{seed, {}, {}};
    for (TrainedRun& run : runs) {
      const BiasRun r{run.lambda, EvaluateRun(run, corpus, Split::kTest).report};
      std::printf("  seed %llu lambda %-4g test acc %.4f bias_rate %.4f held-out gap %+.4f\n",
                  static_cast<unsigned long long>(seed), r.lambda, r.test.accuracy,
                  *r.test.bias_highlighted, *r.test.invariance_gap);
      if (run.lambda == 0.0) {
        s.baseline = r;
      } else {
        s.grid.push_back(r);
      }
    }
    std::printf("  seed %llu: %zu runs in %.1f s\n", static_cast<unsigned long long>(seed),
                runs.size(), clock.seconds());
    std::fflush(stdout);
    cache->push_back(std::move(s));
  }
  return *cache;
}

Verdict BiasReproduction() {
  Verdict v;
  std::string per_seed;
  for (const BiasSeed& s : BiasExperiments()) {
    const BiasRun& best = s.best();
    const double base_bias = *s.baseline.test.bias_highlighted;
    const double best_bias = *best.test.bias_highlighted;
    const double gain = best.test.accuracy - s.baseline.test.accuracy;
    const bool ok = base_bias >= 0.5 && best_bias <= 0.05 && gain >= 0.05;
    std::printf("  seed %llu: lambda 0 bias %.4f (need >= 0.5); best lambda %g bias %.4f "
                "(need <= 0.05); accuracy gain %+.2f pp (need >= 5) %s\n",
                static_cast<unsigned long long>(s.seed), base_bias, best.lambda, best_bias,
                100.0 * gain, ok ? "ok" : "MISS");
    v.pass &= ok;
    per_seed += Fmt(" %.2f/%.2f/%+.1fpp", base_bias, best_bias, 100.0 * gain);
  }
  v.summary = "bias_rate lambda0/best and accuracy gain per seed:" + per_seed;
  return v;
}

Verdict InvarianceGap() {
  Verdict v;
  std::string per_seed;
  for (const BiasSeed& s : BiasExperiments()) {
    const double base_gap = std::abs(*s.baseline.test.invariance_gap);
    const double best_gap = std::abs(*s.best().test.invariance_gap);
    const bool ok_best = best_gap <= 0.05;
    const bool ok_base = base_gap > 0.05;
    std::printf("  seed %llu: lambda %g |L_i - L_e| %.4f (need <= 0.05) %s; lambda 0 %.4f "
                "(need > 0.05) %s\n",
                static_cast<unsigned long long>(s.seed), s.best().lambda, best_gap,
                ok_best ? "ok" : "MISS", base_gap, ok_base ? "ok" : "MISS");
    v.pass &= ok_best && ok_base;
    per_seed += Fmt(" %.4f/%.4f", best_gap, base_gap);
  }
  v.summary = "held-out |gap| lambda>0 / lambda0 per seed:" + per_seed;
  return v;
}

// ---------------------------------------------------------------------------
// 7. Aspect corpus: rationale F1 of every grid lambda against lambda 0.

Verdict AspectReproduction() {
  Verdict v;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    AspectConfig ac;
    ac.seed = seed;
    const Corpus corpus = GenAspectCorpus(ac);
    GameConfig base = AspectGameConfig(ac);
    base.seed = seed;
    std::vector<double> lambdas = {0.0};
    lambdas.insert(lambdas.end(), kGrid.begin(), kGrid.end());
    std::vector<TrainedRun> runs = TrainGrid(corpus, base, lambdas, "");
    double base_f1 = 0.0;
    double worst_gain = 1e9;
    for (TrainedRun& run : runs) {
      const EvalReport r = EvaluateRun(run, corpus, Split::kTest).report;
      std::printf("  seed %llu lambda %-4g rationale F1 %.2f accuracy %.4f (l = %zu)\n",
                  static_cast<unsigned long long>(seed), run.lambda, 100.0 * r.micro.f1,
                  r.accuracy, run.model.config().rationale_len);
      if (run.lambda == 0.0) {
        base_f1 = r.micro.f1;
      } else {
        worst_gain = std::min(worst_gain, r.micro.f1 - base_f1);
      }
    }
    const bool ok = 100.0 * worst_gain >= 10.0;
    std::printf("  seed %llu: smallest F1 gain over lambda 0 %+.2f points (need >= 10) %s\n",
                static_cast<unsigned long long>(seed), 100.0 * worst_gain, ok ? "ok" : "MISS");
    std::fflush(stdout);
    v.pass &= ok;
    per_seed += Fmt(" %+.1f", 100.0 * worst_gain);
  }
  v.summary = "smallest F1 gain (points) per seed:" + per_seed;
  return v;
}

// ---------------------------------------------------------------------------
// 9. Determinism of the repro pipeline.

std::map<std::string, std::string> MetricFiles(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name == "trace.jsonl" || name == "metrics.json" || name == "comparison.json" ||
        name == "comparison.md") {
      out[fs::relative(entry.path(), root).string()] = ReadFile(entry.path().string());
    }
  }
  return out;
}

Verdict Determinism() {
  const fs::path root = fs::temp_directory_path() / "invrat_acceptance_repro";
  fs::remove_all(root);
  ReproOptions options;
  options.seed = 7;
  RunRepro(options, (root / "a").string());
  RunRepro(options, (root / "b").string());
  const auto a = MetricFiles(root / "a");
  const auto b = MetricFiles(root / "b");
  std::size_t identical = 0;
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    const bool same = it != b.end() && it->second == bytes;
    identical += same;
    if (!same) std::printf("  differs: %s\n", name.c_str());
  }
  fs::remove_all(root);
  Verdict v;
  v.pass = !a.empty() && a.size() == b.size() && identical == a.size();
  v.summary = Fmt("%.0f of %.0f trace/metric files byte-identical across two invocations",
                  static_cast<double>(identical), static_cast<double>(a.size()));
  return v;
}

const std::vector<std::pair<const char*, std::function<Verdict()>>>& Criteria() {
  static const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"oracle fixtures", OracleFixtures},
      {"minimax desk check", MinimaxDeskCheck},
      {"invariance verdicts", InvarianceVerdicts},
      {"gradient suite", GradientSuite},
      {"structural mask properties", MaskStructure},
      {"bias corpus reproduction", BiasReproduction},
      {"aspect corpus reproduction", AspectReproduction},
      {"invariance gap at convergence", InvarianceGap},
      {"determinism", Determinism},
  };
  return criteria;
}

bool RunCriterion(std::size_t n) {
  const auto& [name, fn] = Criteria()[n - 1];
  std::printf("criterion %zu: %s\n", n, name);
  std::fflush(stdout);
  Stopwatch clock;
  Verdict v;
  try {
    v = fn();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  std::printf("%s criterion %zu (%s): %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", n, name,
              v.summary.c_str(), clock.seconds());
  std::fflush(stdout);
  return v.pass;
}

}  // namespace
}  // namespace invrat

int main(int argc, char** argv) {
  const std::size_t count = invrat::Criteria().size();
  std::vector<std::size_t> which;
  for (int i = 1; i < argc; ++i) {
    const long n = std::strtol(argv[i], nullptr, 10);
    if (n < 1 || static_cast<std::size_t>(n) > count) {
      std::fprintf(stderr, "usage: %s [criterion 1-%zu ...]\n", argv[0], count);
      return 2;
    }
    which.push_back(static_cast<std::size_t>(n));
  }
  if (which.empty()) {
    for (std::size_t n = 1; n <= count; ++n) which.push_back(n);
  }
  bool all = true;
  for (std::size_t n : which) all &= invrat::RunCriterion(n);
  return all ? 0 : 1;
}
