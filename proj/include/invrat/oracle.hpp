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

// Exact inference on the five-variable binary graph
//
//     E -> X1 -> Y -> X2,   (X1, X2) -> X3
//
// where only the prior of X1 depends on the environment E. Everything here is
// computed by summing the 2^4 * |E| point masses of the joint; entropies are
// in nats.

#ifndef INVRAT_ORACLE_HPP_
#define INVRAT_ORACLE_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace invrat::oracle {

enum class Variable { kE, kX1, kY, kX2, kX3 };

std::string_view VariableName(Variable v);

// Conditional probability tables. Every entry is the probability of the
// child taking value 1.
struct BinaryGraphSpec {
  std::vector<std::string> envs;
  std::vector<double> prior_x1;          // P(X1=1 | E=e), one per env
  std::array<double, 2> y_given_x1{};    // P(Y=1 | X1=x), shared by all envs
  std::array<double, 2> x2_given_y{};    // P(X2=1 | Y=y)
  std::array<double, 4> x3_given_x1x2{}; // P(X3=1 | X1=a, X2=b) at 2a+b

  // Throws InvalidArgument on a probability outside [0, 1] or a size mismatch.
  void Validate() const;
};

// Single environment, P(X1=1) = 0.5, all links at 0.9 / the X3 table
// {0, 0.5, 0.5, 1}: the three features are equally predictive of Y.
BinaryGraphSpec ToyPreset();
// ToyPreset as env "e1" plus env "e2" with P(X1=1) = 0.6.
BinaryGraphSpec ShiftPreset();
// Two environments, every probability 0.5.
BinaryGraphSpec UniformPreset();

std::vector<double> UniformWeights(std::size_t num_envs);

enum class Feature : std::uint8_t { kX1 = 1, kX2 = 2, kX3 = 4 };

// A subset of {X1, X2, X3}.
class FeatureSubset {
 public:
  constexpr FeatureSubset() = default;
  constexpr explicit FeatureSubset(unsigned bits) : bits_(bits & 7u) {}
  FeatureSubset(std::initializer_list<Feature> members);

  // Parses "{}", "{X1}", "X1,X3", "x2 x3" and the like.
  static FeatureSubset Parse(std::string_view text);
  // All 8 subsets, smaller first, then lexicographic by member list.
  static std::vector<FeatureSubset> PowerSet();

  constexpr unsigned bits() const { return bits_; }
  constexpr bool contains(Feature f) const {
    return (bits_ & static_cast<unsigned>(f)) != 0;
  }
  int size() const;
  bool empty() const { return bits_ == 0; }
  bool is_subset_of(FeatureSubset other) const {
    return (bits_ & ~other.bits_) == 0;
  }
  std::string ToString() const;

  // Canonical order: size, then lexicographic member list.
  bool operator<(const FeatureSubset& other) const;
  constexpr bool operator==(const FeatureSubset&) const = default;

 private:
  unsigned bits_ = 0;
};

// Test-environment priors chosen by the adversary.
struct AdversarialPriors {
  double x1 = 0.5;                        // P(X1=1)
  std::array<double, 4> x2_given_x1y{};   // P(X2=1 | X1=a, Y=y) at 2a+y
  std::array<double, 4> x3_given_x1x2{};  // P(X3=1 | X1=a, X2=b) at 2a+b

  void Validate() const;
  // The priors of the pooled training distribution, expressed in the
  // adversary's parameterisation.
  static AdversarialPriors FromTraining(const BinaryGraphSpec& spec,
                                        std::span<const double> env_weights);
};

// A (possibly partial) assignment of binary values to variables; E holds an
// environment index.
class Assignment {
 public:
  Assignment() = default;
  Assignment(std::initializer_list<std::pair<Variable, int>> values);

  Assignment& set(Variable v, int value);
  std::optional<int> get(Variable v) const;
  bool has(Variable v) const { return get(v).has_value(); }
  std::string ToString() const;

 private:
  std::array<std::optional<int>, 5> values_;
};

class JointTable {
 public:
  std::size_t num_envs() const { return env_weights_.size(); }
  const std::vector<double>& env_weights() const { return env_weights_; }
  // P(Y=1 | X1=x): the environment-independent mechanism.
  const std::array<double, 2>& y_given_x1() const { return y_given_x1_; }

  double mass(int e, int x1, int y, int x2, int x3) const {
    return mass_[Index(e, x1, y, x2, x3)];
  }
  const std::vector<double>& masses() const { return mass_; }
  double total() const;
  // Probability of the event described by a partial assignment.
  double Probability(const Assignment& event) const;

  static std::size_t Index(int e, int x1, int y, int x2, int x3) {
    return ((((static_cast<std::size_t>(e) * 2 + x1) * 2 + y) * 2 + x2) * 2) + x3;
  }

 private:
  friend JointTable BuildJoint(const BinaryGraphSpec&, std::span<const double>);

  std::vector<double> mass_;
  std::vector<double> env_weights_;
  std::array<double, 2> y_given_x1_{};
};

// mass(e,x1,y,x2,x3) = w(e) P(x1|e) P(y|x1) P(x2|y) P(x3|x1,x2).
JointTable BuildJoint(const BinaryGraphSpec& spec,
                      std::span<const double> env_weights);

// P(target = 1 | given). Throws UndefinedConditional on a zero-mass event.
double Conditional(const JointTable& joint, Variable target,
                   const Assignment& given);

double BinaryEntropy(double p);

// H(Y | Z) or H(Y | Z, E).
double ConditionalEntropy(const JointTable& joint, FeatureSubset z,
                          bool condition_on_env);
// I(Y; Z) = H(Y) - H(Y | Z), clamped at zero.
double MutualInformation(const JointTable& joint, FeatureSubset z);
// H(Y | Z) - H(Y | Z, E) <= tol.
bool IsInvariant(const JointTable& joint, FeatureSubset z, double tol);

// Probabilities of the pooled training predictor are clamped into
// [kProbabilityClamp, 1 - kProbabilityClamp] before taking logs; a rationale
// value never seen in training predicts 1/2.
inline constexpr double kProbabilityClamp = 1e-9;

// Cross-entropy, in the test environment, of the predictor that reproduces
// the pooled training conditional p(Y | Z).
double AdversarialTestLoss(const JointTable& train,
                           const AdversarialPriors& test, FeatureSubset z);

struct SubsetWorstCase {
  FeatureSubset subset;
  double max_loss = 0.0;
  AdversarialPriors worst;
};

struct MinimaxReport {
  std::vector<SubsetWorstCase> rows;        // canonical subset order
  std::vector<FeatureSubset> minimizers;    // within kTieTolerance of the min
  FeatureSubset winner;                     // first minimizer
  bool conclusive = false;                  // exactly one minimizer
  std::uint64_t candidates = 0;

  static constexpr double kTieTolerance = 1e-10;
};

// min over subsets of max over the candidate priors of AdversarialTestLoss.
MinimaxReport MinimaxOverPriors(const JointTable& train,
                                std::span<const AdversarialPriors> candidates);

// Same, with the adversary ranging exhaustively over grid^9.
MinimaxReport VerifyMinimaxSaddlePoint(const BinaryGraphSpec& spec,
                                       std::span<const double> env_weights,
                                       std::span<const double> grid);

// n midpoints of [0, 1]: (2k + 1) / (2n). n = 5 gives {0.1, 0.3, ..., 0.9}.
std::vector<double> MidpointGrid(int n);

}  // namespace invrat::oracle

#endif  // INVRAT_ORACLE_HPP_
