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

// Synthetic corpora with known causal and spurious tokens.
//
// Bias corpus: position 0 carries one of two bias tokens whose agreement with
// the label is alpha_e in environment e. The body carries the causal signal:
// with probability causal_strength a single polarity token matching the
// label, otherwise one token of each polarity. Everything else is filler.
//
// Aspect corpus: K aspect scores share a latent factor. Each aspect writes a
// segment of sentiment and neutral tokens tracking its own score; the label
// is the binarised target score. Environments come from the residual of a
// linear fit of the target score on the other scores.

#ifndef INVRAT_DATAGEN_HPP_
#define INVRAT_DATAGEN_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "invrat/corpus.hpp"

namespace invrat {

struct BiasInjectionConfig {
  std::vector<double> alpha_train = {0.9, 0.7};
  double alpha_val = 0.5;
  std::vector<double> alpha_test = {0.1, 0.3};
  double causal_strength = 0.7;
  std::size_t seq_len = 20;
  std::size_t train_per_env = 2000;
  std::size_t holdout_per_env = 500;
  std::size_t val_count = 1000;
  std::size_t test_per_env = 1000;
  int polarity_vocab = 4;  // per polarity
  int filler_vocab = 24;
  std::uint64_t seed = 1;

  void Validate() const;
};

// Token ids of the two bias tokens in every generated bias corpus.
inline constexpr int kBiasTokenA = 0;  // "," agrees with Y=1 at rate alpha
inline constexpr int kBiasTokenB = 1;  // "."

Corpus GenBiasCorpus(const BiasInjectionConfig& config);

struct AspectConfig {
  int num_aspects = 2;
  int target = 0;
  double correlation = 0.7;             // weight of the shared factor, [0, 1)
  std::size_t segment_len = 8;
  std::vector<double> density = {0.5, 1.0};    // sentiment-token rate per aspect
  std::vector<double> sharpness = {1.0, 4.0};  // polarity/score coupling per aspect
  int sentiment_vocab = 4;              // per aspect and polarity
  int neutral_vocab = 4;                // per aspect
  std::size_t examples = 8000;          // kept after dropping the middle band
  std::vector<double> percentiles = {25.0, 50.0};
  double holdout_fraction = 0.2;
  bool shuffle_segments = true;
  std::uint64_t seed = 1;

  void Validate() const;
};

Corpus GenAspectCorpus(const AspectConfig& config);

struct OlsResult {
  std::vector<double> coefficients;  // intercept first
  std::vector<double> residuals;     // |prediction - target|
  bool ridge = false;                // normal equations were regularised
};

// Least squares with intercept, rows of `features` as observations.
OlsResult OlsFit(const std::vector<std::vector<double>>& features,
                 const std::vector<double>& target);

// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value.
double NearestRankPercentile(std::vector<double> values, double p);

struct EnvAssignment {
  std::vector<int> bucket;         // 0..k-1 for the k percentiles, k = pool
  std::vector<double> thresholds;  // residual cut-offs
  bool ties_at_boundary = false;   // equal residuals straddle a cut-off
};

// Rows with residual <= threshold[j] (and above threshold[j-1]) go to bucket
// j; everything above the last threshold goes to bucket k.
EnvAssignment AssignEnvironments(const std::vector<double>& residuals,
                                 const std::vector<double>& percentiles);

// JSON views of the generator configs. Unknown keys are rejected.
std::string BiasConfigToJson(const BiasInjectionConfig& config);
BiasInjectionConfig BiasConfigFromJson(const std::string& text);
std::string AspectConfigToJson(const AspectConfig& config);
AspectConfig AspectConfigFromJson(const std::string& text);

}  // namespace invrat

#endif  // INVRAT_DATAGEN_HPP_
