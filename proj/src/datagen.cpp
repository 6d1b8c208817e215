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

#include "invrat/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "invrat/error.hpp"
#include "invrat/rng.hpp"
#include "json.hpp"

namespace invrat {
namespace {

using json = nlohmann::json;

void CheckUnit(double v, const std::string& what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw InvalidArgument(what + " must lie in [0, 1], got " + std::to_string(v));
  }
}

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double Logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Picks `k` distinct values from [lo, hi) in draw order.
std::vector<std::size_t> DistinctPositions(Rng& rng, std::size_t lo, std::size_t hi,
                                           std::size_t k) {
  std::vector<std::size_t> out;
  while (out.size() < k) {
    const std::size_t p = lo + rng.below(hi - lo);
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

// Reads a flat JSON object into config fields, rejecting unknown keys.
class FieldMap {
 public:
  using Setter = std::function<void(const json&)>;

  void add(const std::string& key, Setter set) { setters_[key] = std::move(set); }

  void Apply(const std::string& text, const std::string& what) const {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(what + ": " + e.what(), 0);
    }
    if (!doc.is_object()) throw ParseError(what + ": expected an object", 0);
    for (const auto& [key, value] : doc.items()) {
      const auto it = setters_.find(key);
      if (it == setters_.end()) throw InvalidArgument(what + ": unknown key '" + key + "'");
      try {
        it->second(value);
      } catch (const json::exception& e) {
        throw InvalidArgument(what + ": bad value for '" + key + "': " + e.what());
      }
    }
  }

 private:
  std::map<std::string, Setter> setters_;
};

template <typename T>
FieldMap::Setter Into(T& field) {
  return [&field](const json& v) { field = v.get<T>(); };
}

}  // namespace

void BiasInjectionConfig::Validate() const {
  if (alpha_train.size() < 2) throw InvalidArgument("need at least two training envs");
  for (double a : alpha_train) CheckUnit(a, "alpha_train");
  for (double a : alpha_test) CheckUnit(a, "alpha_test");
  CheckUnit(alpha_val, "alpha_val");
  CheckUnit(causal_strength, "causal_strength");
  if (seq_len < 3) throw InvalidArgument("bias corpus needs seq_len >= 3");
  if (polarity_vocab < 1 || filler_vocab < 1) {
    throw InvalidArgument("vocabulary sizes must be positive");
  }
  if (train_per_env == 0) throw InvalidArgument("train_per_env must be positive");
}

Corpus GenBiasCorpus(const BiasInjectionConfig& config) {
  config.Validate();
  Corpus corpus;
  corpus.kind = "bias";
  corpus.seq_len = config.seq_len;
  corpus.num_envs = static_cast<int>(config.alpha_train.size());
  corpus.config_json = BiasConfigToJson(config);
  corpus.vocab = {",", "."};
  const int pos0 = 2;
  const int neg0 = pos0 + config.polarity_vocab;
  const int fill0 = neg0 + config.polarity_vocab;
  for (int j = 0; j < config.polarity_vocab; ++j) corpus.vocab.push_back("pos" + std::to_string(j));
  for (int j = 0; j < config.polarity_vocab; ++j) corpus.vocab.push_back("neg" + std::to_string(j));
  for (int j = 0; j < config.filler_vocab; ++j) corpus.vocab.push_back("w" + std::to_string(j));

  std::uint64_t index = 0;
  auto make = [&](double alpha, int env, Split split) {
    Rng rng(Rng::derive(config.seed, index++));
    const std::size_t n = config.seq_len;
    Example ex;
    ex.label = rng.bernoulli(0.5) ? 1 : 0;
    ex.env = env;
    ex.split = split;
    ex.tokens.resize(n);
    ex.truth.assign(n, 0);
    ex.bias.assign(n, 0);
    const bool agree = rng.bernoulli(alpha);
    ex.tokens[0] = (ex.label == 1) == agree ? kBiasTokenA : kBiasTokenB;
    ex.bias[0] = 1;
    for (std::size_t i = 1; i < n; ++i) {
      ex.tokens[i] = fill0 + static_cast<int>(rng.below(config.filler_vocab));
    }
    auto polarity_token = [&](int positive) {
      return (positive ? pos0 : neg0) + static_cast<int>(rng.below(config.polarity_vocab));
    };
    if (rng.bernoulli(config.causal_strength)) {
      const std::size_t p = DistinctPositions(rng, 1, n, 1)[0];
      ex.tokens[p] = polarity_token(ex.label);
      ex.truth[p] = 1;
    } else {
      const auto ps = DistinctPositions(rng, 1, n, 2);
      ex.tokens[ps[0]] = polarity_token(1);
      ex.tokens[ps[1]] = polarity_token(0);
      ex.truth[ps[0]] = ex.truth[ps[1]] = 1;
    }
    corpus.examples.push_back(std::move(ex));
  };

  for (std::size_t e = 0; e < config.alpha_train.size(); ++e) {
    for (std::size_t i = 0; i < config.train_per_env; ++i) {
      make(config.alpha_train[e], static_cast<int>(e), Split::kTrain);
    }
  }
  for (std::size_t e = 0; e < config.alpha_train.size(); ++e) {
    for (std::size_t i = 0; i < config.holdout_per_env; ++i) {
      make(config.alpha_train[e], static_cast<int>(e), Split::kHoldout);
    }
  }
  for (std::size_t i = 0; i < config.val_count; ++i) make(config.alpha_val, -1, Split::kVal);
  for (double alpha : config.alpha_test) {
    for (std::size_t i = 0; i < config.test_per_env; ++i) make(alpha, -1, Split::kTest);
  }
  return corpus;
}

void AspectConfig::Validate() const {
  if (num_aspects < 2) throw InvalidArgument("aspect corpus needs >= 2 aspects");
  if (target < 0 || target >= num_aspects) throw InvalidArgument("target aspect out of range");
  if (!(correlation >= 0.0 && correlation < 1.0)) {
    throw InvalidArgument("correlation must lie in [0, 1), got " +
                          std::to_string(correlation));
  }
  if (segment_len == 0) throw InvalidArgument("segment_len must be positive");
  if (density.size() != static_cast<std::size_t>(num_aspects) ||
      sharpness.size() != static_cast<std::size_t>(num_aspects)) {
    throw InvalidArgument("density and sharpness need one entry per aspect");
  }
  for (double d : density) CheckUnit(d, "density");
  if (density[target] <= 0.0) throw InvalidArgument("target aspect needs density > 0");
  if (sentiment_vocab < 1 || neutral_vocab < 1) {
    throw InvalidArgument("vocabulary sizes must be positive");
  }
  if (percentiles.empty()) throw InvalidArgument("need at least one percentile");
  for (std::size_t j = 0; j < percentiles.size(); ++j) {
    if (!(percentiles[j] > 0.0 && percentiles[j] <= 100.0) ||
        (j > 0 && percentiles[j] <= percentiles[j - 1])) {
      throw InvalidArgument("percentiles must increase within (0, 100]");
    }
  }
  CheckUnit(holdout_fraction, "holdout_fraction");
  if (examples < 10) throw InvalidArgument("aspect corpus needs >= 10 examples");
}

Corpus GenAspectCorpus(const AspectConfig& config) {
  config.Validate();
  const int k_aspects = config.num_aspects;
  const std::size_t len = config.segment_len;

  Corpus corpus;
  corpus.kind = "aspect";
  corpus.seq_len = len * k_aspects;
  corpus.num_envs = static_cast<int>(config.percentiles.size());
  corpus.config_json = AspectConfigToJson(config);
  // Per aspect: positive, negative, then neutral tokens.
  std::vector<int> pos0(k_aspects), neg0(k_aspects), neu0(k_aspects);
  for (int a = 0; a < k_aspects; ++a) {
    const std::string tag = "a" + std::to_string(a);
    pos0[a] = static_cast<int>(corpus.vocab.size());
    for (int j = 0; j < config.sentiment_vocab; ++j) corpus.vocab.push_back(tag + "+" + std::to_string(j));
    neg0[a] = static_cast<int>(corpus.vocab.size());
    for (int j = 0; j < config.sentiment_vocab; ++j) corpus.vocab.push_back(tag + "-" + std::to_string(j));
    neu0[a] = static_cast<int>(corpus.vocab.size());
    for (int j = 0; j < config.neutral_vocab; ++j) corpus.vocab.push_back(tag + "~" + std::to_string(j));
  }

  std::vector<Example> rows;
  std::vector<std::vector<double>> scores;
  const double shared = std::sqrt(config.correlation);
  const double own = std::sqrt(1.0 - config.correlation);
  const std::uint64_t max_attempts = 100 * static_cast<std::uint64_t>(config.examples);
  for (std::uint64_t attempt = 0; rows.size() < config.examples; ++attempt) {
    if (attempt == max_attempts) throw InvalidArgument("aspect generator cannot fill the requested count");
    Rng rng(Rng::derive(config.seed, attempt));
    const double factor = rng.normal();
    std::vector<double> s(k_aspects);
    for (int a = 0; a < k_aspects; ++a) s[a] = NormalCdf(shared * factor + own * rng.normal());
    const double t = s[config.target];
    if (t > 0.4 && t < 0.6) continue;  // middle band dropped

    std::vector<int> order(k_aspects);
    std::iota(order.begin(), order.end(), 0);
    if (config.shuffle_segments) {
      for (int i = k_aspects - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    }
    Example ex;
    ex.label = t >= 0.6 ? 1 : 0;
    ex.tokens.resize(corpus.seq_len);
    ex.truth.assign(corpus.seq_len, 0);
    ex.bias.assign(corpus.seq_len, 0);
    for (int slot = 0; slot < k_aspects; ++slot) {
      const int a = order[slot];
      const double p_pos = Logistic(config.sharpness[a] * 3.0 * (2.0 * s[a] - 1.0));
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t p = slot * len + i;
        if (rng.bernoulli(config.density[a])) {
          const int base = rng.bernoulli(p_pos) ? pos0[a] : neg0[a];
          ex.tokens[p] = base + static_cast<int>(rng.below(config.sentiment_vocab));
        } else {
          ex.tokens[p] = neu0[a] + static_cast<int>(rng.below(config.neutral_vocab));
        }
        ex.truth[p] = a == config.target;
      }
    }
    rows.push_back(std::move(ex));
    scores.push_back(std::move(s));
  }

  std::vector<std::vector<double>> features;
  std::vector<double> target;
  for (const auto& s : scores) {
    std::vector<double> f;
    for (int a = 0; a < k_aspects; ++a) {
      if (a != config.target) f.push_back(s[a]);
    }
    features.push_back(std::move(f));
    target.push_back(s[config.target]);
  }
  const OlsResult fit = OlsFit(features, target);
  const EnvAssignment envs = AssignEnvironments(fit.residuals, config.percentiles);

  // Label-balance each bucket by keeping the earliest rows of each label.
  const int pool = corpus.num_envs;
  for (int b = 0; b <= pool; ++b) {
    std::vector<std::size_t> by_label[2];
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (envs.bucket[i] == b) by_label[rows[i].label].push_back(i);
    }
    const std::size_t keep = std::min(by_label[0].size(), by_label[1].size());
    std::vector<std::size_t> kept;
    for (int y = 0; y < 2; ++y) kept.insert(kept.end(), by_label[y].begin(), by_label[y].begin() + keep);
    std::sort(kept.begin(), kept.end());
    const std::size_t n_train =
        static_cast<std::size_t>(std::llround((1.0 - config.holdout_fraction) * kept.size()));
    for (std::size_t r = 0; r < kept.size(); ++r) {
      Example ex = rows[kept[r]];
      if (b < pool) {
        ex.env = b;
        ex.split = r < n_train ? Split::kTrain : Split::kHoldout;
      } else {
        ex.env = -1;
        ex.split = r % 2 == 0 ? Split::kVal : Split::kTest;
      }
      corpus.examples.push_back(std::move(ex));
    }
  }
  return corpus;
}

OlsResult OlsFit(const std::vector<std::vector<double>>& features,
                 const std::vector<double>& target) {
  const std::size_t n = features.size();
  if (n != target.size()) throw InvalidArgument("feature and target row counts differ");
  const std::size_t p = n == 0 ? 0 : features[0].size() + 1;
  if (n <= p) {
    throw InvalidArgument("least squares needs more rows (" + std::to_string(n) +
                          ") than columns (" + std::to_string(p) + ")");
  }
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (features[i].size() + 1 != p) throw InvalidArgument("ragged feature matrix");
    x(i, 0) = 1.0;
    for (std::size_t j = 1; j < p; ++j) x(i, j) = features[i][j - 1];
    y(i) = target[i];
  }
  Eigen::MatrixXd gram = x.transpose() * x;
  const Eigen::VectorXd rhs = x.transpose() * y;

  OlsResult result;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12) {
    const double ridge = 1e-6 * std::max(gram.trace() / static_cast<double>(p), 1e-12);
    gram.diagonal().array() += ridge;
    ldlt.compute(gram);
    result.ridge = true;
  }
  const Eigen::VectorXd beta = ldlt.solve(rhs);
  const Eigen::VectorXd pred = x * beta;
  result.coefficients.assign(beta.data(), beta.data() + p);
  result.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.residuals[i] = std::abs(pred(i) - y(i));
  return result;
}

double NearestRankPercentile(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidArgument("percentile of an empty list");
  if (!(p > 0.0 && p <= 100.0)) throw InvalidArgument("percentile must lie in (0, 100]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * values.size()));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

EnvAssignment AssignEnvironments(const std::vector<double>& residuals,
                                 const std::vector<double>& percentiles) {
  if (residuals.empty()) throw InvalidArgument("no residuals to assign");
  EnvAssignment out;
  const std::size_t n = residuals.size();
  for (double p : percentiles) {
    const double t = NearestRankPercentile(residuals, p);
    out.thresholds.push_back(t);
    const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    const auto at_or_below = static_cast<std::size_t>(
        std::count_if(residuals.begin(), residuals.end(), [t](double r) { return r <= t; }));
    out.ties_at_boundary |= at_or_below > rank;
  }
  out.bucket.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = 0;
    while (j < out.thresholds.size() && residuals[i] > out.thresholds[j]) ++j;
    out.bucket[i] = static_cast<int>(j);
  }
  return out;
}

std::string BiasConfigToJson(const BiasInjectionConfig& c) {
  return json{{"alpha_train", c.alpha_train},
              {"alpha_val", c.alpha_val},
              {"alpha_test", c.alpha_test},
              {"causal_strength", c.causal_strength},
              {"seq_len", c.seq_len},
              {"train_per_env", c.train_per_env},
              {"holdout_per_env", c.holdout_per_env},
              {"val_count", c.val_count},
              {"test_per_env", c.test_per_env},
              {"polarity_vocab", c.polarity_vocab},
              {"filler_vocab", c.filler_vocab},
              {"seed", c.seed}}
      .dump();
}

BiasInjectionConfig BiasConfigFromJson(const std::string& text) {
  BiasInjectionConfig c;
  FieldMap m;
  m.add("alpha_train", Into(c.alpha_train));
  m.add("alpha_val", Into(c.alpha_val));
  m.add("alpha_test", Into(c.alpha_test));
  m.add("causal_strength", Into(c.causal_strength));
  m.add("seq_len", Into(c.seq_len));
  m.add("train_per_env", Into(c.train_per_env));
  m.add("holdout_per_env", Into(c.holdout_per_env));
  m.add("val_count", Into(c.val_count));
  m.add("test_per_env", Into(c.test_per_env));
  m.add("polarity_vocab", Into(c.polarity_vocab));
  m.add("filler_vocab", Into(c.filler_vocab));
  m.add("seed", Into(c.seed));
  m.Apply(text, "bias config");
  c.Validate();
  return c;
}

std::string AspectConfigToJson(const AspectConfig& c) {
  return json{{"num_aspects", c.num_aspects},
              {"target", c.target},
              {"correlation", c.correlation},
              {"segment_len", c.segment_len},
              {"density", c.density},
              {"sharpness", c.sharpness},
              {"sentiment_vocab", c.sentiment_vocab},
              {"neutral_vocab", c.neutral_vocab},
              {"examples", c.examples},
              {"percentiles", c.percentiles},
              {"holdout_fraction", c.holdout_fraction},
              {"shuffle_segments", c.shuffle_segments},
              {"seed", c.seed}}
      .dump();
}

AspectConfig AspectConfigFromJson(const std::string& text) {
  AspectConfig c;
  FieldMap m;
  m.add("num_aspects", Into(c.num_aspects));
  m.add("target", Into(c.target));
  m.add("correlation", Into(c.correlation));
  m.add("segment_len", Into(c.segment_len));
  m.add("density", Into(c.density));
  m.add("sharpness", Into(c.sharpness));
  m.add("sentiment_vocab", Into(c.sentiment_vocab));
  m.add("neutral_vocab", Into(c.neutral_vocab));
  m.add("examples", Into(c.examples));
  m.add("percentiles", Into(c.percentiles));
  m.add("holdout_fraction", Into(c.holdout_fraction));
  m.add("shuffle_segments", Into(c.shuffle_segments));
  m.add("seed", Into(c.seed));
  m.Apply(text, "aspect config");
  c.Validate();
  return c;
}

}  // namespace invrat
