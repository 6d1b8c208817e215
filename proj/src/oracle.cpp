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

#include "invrat/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "invrat/error.hpp"

namespace invrat::oracle {
namespace {

void CheckProbability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream ss;
    ss << what << " = " << p << " is not a probability";
    throw InvalidArgument(ss.str());
  }
}

double Bernoulli(double p_one, int value) { return value ? p_one : 1.0 - p_one; }

std::vector<int> Members(FeatureSubset s) {
  std::vector<int> out;
  for (int k = 0; k < 3; ++k) {
    if (s.bits() & (1u << k)) out.push_back(k);
  }
  return out;
}

// Bits of the rationale value z = proj_Z(x1, x2, x3).
unsigned ProjectZ(FeatureSubset z, int x1, int x2, int x3) {
  unsigned key = 0;
  if (z.contains(Feature::kX1)) key |= static_cast<unsigned>(x1);
  if (z.contains(Feature::kX2)) key |= static_cast<unsigned>(x2) << 1;
  if (z.contains(Feature::kX3)) key |= static_cast<unsigned>(x3) << 2;
  return key;
}

// Index of (x1, y, x2, x3) in a 16-entry environment-free table.
constexpr int Cell(int x1, int y, int x2, int x3) {
  return ((x1 * 2 + y) * 2 + x2) * 2 + x3;
}

// -log q(y | z) of the pooled training predictor, per subset and cell.
// Loss of any test joint is then a dot product with its 16 masses.
struct CostTable {
  std::vector<FeatureSubset> subsets;
  std::vector<std::array<double, 16>> cost;

  explicit CostTable(const JointTable& train)
      : subsets(FeatureSubset::PowerSet()), cost(subsets.size()) {
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      std::array<double, 8> m0{}, m1{};
      for (std::size_t e = 0; e < train.num_envs(); ++e) {
        for (int x1 = 0; x1 < 2; ++x1)
          for (int y = 0; y < 2; ++y)
            for (int x2 = 0; x2 < 2; ++x2)
              for (int x3 = 0; x3 < 2; ++x3) {
                const unsigned key = ProjectZ(subsets[s], x1, x2, x3);
                const double m = train.mass(static_cast<int>(e), x1, y, x2, x3);
                (y ? m1 : m0)[key] += m;
              }
      }
      for (int x1 = 0; x1 < 2; ++x1)
        for (int y = 0; y < 2; ++y)
          for (int x2 = 0; x2 < 2; ++x2)
            for (int x3 = 0; x3 < 2; ++x3) {
              const unsigned key = ProjectZ(subsets[s], x1, x2, x3);
              const double total = m0[key] + m1[key];
              double q = total > 0.0 ? m1[key] / total : 0.5;
              q = std::clamp(q, kProbabilityClamp, 1.0 - kProbabilityClamp);
              cost[s][Cell(x1, y, x2, x3)] = -std::log(y ? q : 1.0 - q);
            }
    }
  }

  double Loss(std::size_t s, const std::array<double, 16>& p) const {
    double loss = 0.0;
    for (int a = 0; a < 16; ++a) {
      if (p[a] > 0.0) loss += p[a] * cost[s][a];
    }
    return loss;
  }
};

std::array<double, 16> TestMasses(const std::array<double, 2>& y_given_x1,
                                  const AdversarialPriors& pi) {
  std::array<double, 16> p{};
  for (int x1 = 0; x1 < 2; ++x1)
    for (int y = 0; y < 2; ++y)
      for (int x2 = 0; x2 < 2; ++x2)
        for (int x3 = 0; x3 < 2; ++x3) {
          p[Cell(x1, y, x2, x3)] = Bernoulli(pi.x1, x1) *
                                   Bernoulli(y_given_x1[x1], y) *
                                   Bernoulli(pi.x2_given_x1y[2 * x1 + y], x2) *
                                   Bernoulli(pi.x3_given_x1x2[2 * x1 + x2], x3);
        }
  return p;
}

// Tracks the running maximum per subset; ties keep the earliest candidate.
class Maximizer {
 public:
  explicit Maximizer(const CostTable& table) : table_(table) {
    rows_.resize(table.subsets.size());
    for (std::size_t s = 0; s < rows_.size(); ++s) {
      rows_[s].subset = table.subsets[s];
      rows_[s].max_loss = -1.0;
    }
  }

  void Offer(const std::array<double, 2>& y_given_x1,
             const AdversarialPriors& pi) {
    const auto p = TestMasses(y_given_x1, pi);
    for (std::size_t s = 0; s < rows_.size(); ++s) {
      const double loss = table_.Loss(s, p);
      if (loss > rows_[s].max_loss) {
        rows_[s].max_loss = loss;
        rows_[s].worst = pi;
      }
    }
    ++count_;
  }

  MinimaxReport Finish() && {
    MinimaxReport report;
    report.rows = std::move(rows_);
    report.candidates = count_;
    double best = report.rows.front().max_loss;
    for (const auto& row : report.rows) best = std::min(best, row.max_loss);
    for (const auto& row : report.rows) {
      if (row.max_loss <= best + MinimaxReport::kTieTolerance) {
        report.minimizers.push_back(row.subset);
      }
    }
    report.winner = report.minimizers.front();
    report.conclusive = report.minimizers.size() == 1;
    return report;
  }

 private:
  const CostTable& table_;
  std::vector<SubsetWorstCase> rows_;
  std::uint64_t count_ = 0;
};

}  // namespace

std::string_view VariableName(Variable v) {
  switch (v) {
    case Variable::kE: return "E";
    case Variable::kX1: return "X1";
    case Variable::kY: return "Y";
    case Variable::kX2: return "X2";
    case Variable::kX3: return "X3";
  }
  return "?";
}

void BinaryGraphSpec::Validate() const {
  if (envs.empty()) throw InvalidArgument("graph spec has no environments");
  if (envs.size() != prior_x1.size()) {
    throw InvalidArgument("graph spec lists " + std::to_string(envs.size()) +
                          " environments but " +
                          std::to_string(prior_x1.size()) + " X1 priors");
  }
  for (std::size_t e = 0; e < envs.size(); ++e) {
    CheckProbability(prior_x1[e], "P(X1=1 | E=" + envs[e] + ")");
  }
  for (int x = 0; x < 2; ++x) {
    CheckProbability(y_given_x1[x], "P(Y=1 | X1=" + std::to_string(x) + ")");
    CheckProbability(x2_given_y[x], "P(X2=1 | Y=" + std::to_string(x) + ")");
  }
  for (int k = 0; k < 4; ++k) {
    CheckProbability(x3_given_x1x2[k], "P(X3=1 | X1=" + std::to_string(k / 2) +
                                           ", X2=" + std::to_string(k % 2) + ")");
  }
}

BinaryGraphSpec ToyPreset() {
  BinaryGraphSpec spec;
  spec.envs = {"e1"};
  spec.prior_x1 = {0.5};
  spec.y_given_x1 = {0.1, 0.9};
  spec.x2_given_y = {0.1, 0.9};
  spec.x3_given_x1x2 = {0.0, 0.5, 0.5, 1.0};
  return spec;
}

BinaryGraphSpec ShiftPreset() {
  BinaryGraphSpec spec = ToyPreset();
  spec.envs.push_back("e2");
  spec.prior_x1.push_back(0.6);
  return spec;
}

BinaryGraphSpec UniformPreset() {
  BinaryGraphSpec spec;
  spec.envs = {"e1", "e2"};
  spec.prior_x1 = {0.5, 0.5};
  spec.y_given_x1 = {0.5, 0.5};
  spec.x2_given_y = {0.5, 0.5};
  spec.x3_given_x1x2 = {0.5, 0.5, 0.5, 0.5};
  return spec;
}

std::vector<double> UniformWeights(std::size_t num_envs) {
  if (num_envs == 0) throw InvalidArgument("no environments to weight");
  return std::vector<double>(num_envs, 1.0 / static_cast<double>(num_envs));
}

FeatureSubset::FeatureSubset(std::initializer_list<Feature> members) {
  for (Feature f : members) bits_ |= static_cast<unsigned>(f);
}

FeatureSubset FeatureSubset::Parse(std::string_view text) {
  unsigned bits = 0;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    if (token == "x1") {
      bits |= 1u;
    } else if (token == "x2") {
      bits |= 2u;
    } else if (token == "x3") {
      bits |= 4u;
    } else {
      throw InvalidArgument("unknown feature '" + token + "' (want X1, X2, X3)");
    }
    token.clear();
  };
  for (char c : text) {
    if (c == '{' || c == '}' || c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  flush();
  return FeatureSubset(bits);
}

std::vector<FeatureSubset> FeatureSubset::PowerSet() {
  std::vector<FeatureSubset> all;
  for (unsigned b = 0; b < 8; ++b) all.emplace_back(b);
  std::sort(all.begin(), all.end());
  return all;
}

int FeatureSubset::size() const { return std::popcount(bits_); }

std::string FeatureSubset::ToString() const {
  std::string out = "{";
  for (int k : Members(*this)) {
    if (out.size() > 1) out += ",";
    out += "X" + std::to_string(k + 1);
  }
  return out + "}";
}

bool FeatureSubset::operator<(const FeatureSubset& other) const {
  if (size() != other.size()) return size() < other.size();
  return Members(*this) < Members(other);
}

void AdversarialPriors::Validate() const {
  CheckProbability(x1, "pi1");
  for (int k = 0; k < 4; ++k) {
    CheckProbability(x2_given_x1y[k], "pi2[" + std::to_string(k) + "]");
    CheckProbability(x3_given_x1x2[k], "pi3[" + std::to_string(k) + "]");
  }
}

AdversarialPriors AdversarialPriors::FromTraining(
    const BinaryGraphSpec& spec, std::span<const double> env_weights) {
  spec.Validate();
  if (env_weights.size() != spec.envs.size()) {
    throw InvalidArgument("env_weights size does not match environment count");
  }
  AdversarialPriors pi;
  pi.x1 = 0.0;
  for (std::size_t e = 0; e < env_weights.size(); ++e) {
    pi.x1 += env_weights[e] * spec.prior_x1[e];
  }
  for (int x1 = 0; x1 < 2; ++x1) {
    for (int y = 0; y < 2; ++y) pi.x2_given_x1y[2 * x1 + y] = spec.x2_given_y[y];
  }
  pi.x3_given_x1x2 = spec.x3_given_x1x2;
  return pi;
}

Assignment::Assignment(std::initializer_list<std::pair<Variable, int>> values) {
  for (const auto& [v, value] : values) set(v, value);
}

Assignment& Assignment::set(Variable v, int value) {
  if (value < 0 || (v != Variable::kE && value > 1)) {
    throw InvalidArgument(std::string(VariableName(v)) + " cannot take value " +
                          std::to_string(value));
  }
  values_[static_cast<int>(v)] = value;
  return *this;
}

std::optional<int> Assignment::get(Variable v) const {
  return values_[static_cast<int>(v)];
}

std::string Assignment::ToString() const {
  std::string out;
  for (int k = 0; k < 5; ++k) {
    if (!values_[k]) continue;
    if (!out.empty()) out += ", ";
    out += std::string(VariableName(static_cast<Variable>(k))) + "=" +
           std::to_string(*values_[k]);
  }
  return out;
}

double JointTable::total() const {
  return std::accumulate(mass_.begin(), mass_.end(), 0.0);
}

double JointTable::Probability(const Assignment& event) const {
  const auto want_e = event.get(Variable::kE);
  if (want_e && static_cast<std::size_t>(*want_e) >= num_envs()) {
    throw InvalidArgument("environment index " + std::to_string(*want_e) +
                          " out of range");
  }
  auto matches = [&](Variable v, int value) {
    const auto want = event.get(v);
    return !want || *want == value;
  };
  double p = 0.0;
  for (std::size_t e = 0; e < num_envs(); ++e) {
    if (!matches(Variable::kE, static_cast<int>(e))) continue;
    for (int x1 = 0; x1 < 2; ++x1) {
      if (!matches(Variable::kX1, x1)) continue;
      for (int y = 0; y < 2; ++y) {
        if (!matches(Variable::kY, y)) continue;
        for (int x2 = 0; x2 < 2; ++x2) {
          if (!matches(Variable::kX2, x2)) continue;
          for (int x3 = 0; x3 < 2; ++x3) {
            if (!matches(Variable::kX3, x3)) continue;
            p += mass(static_cast<int>(e), x1, y, x2, x3);
          }
        }
      }
    }
  }
  return p;
}

JointTable BuildJoint(const BinaryGraphSpec& spec,
                      std::span<const double> env_weights) {
  spec.Validate();
  if (env_weights.size() != spec.envs.size()) {
    throw InvalidArgument("got " + std::to_string(env_weights.size()) +
                          " env weights for " + std::to_string(spec.envs.size()) +
                          " environments");
  }
  double wsum = 0.0;
  for (std::size_t e = 0; e < env_weights.size(); ++e) {
    CheckProbability(env_weights[e], "weight of env " + spec.envs[e]);
    wsum += env_weights[e];
  }
  if (std::abs(wsum - 1.0) > 1e-9) {
    throw InvalidArgument("env weights sum to " + std::to_string(wsum) +
                          ", expected 1");
  }

  JointTable joint;
  joint.env_weights_.assign(env_weights.begin(), env_weights.end());
  joint.y_given_x1_ = spec.y_given_x1;
  joint.mass_.assign(env_weights.size() * 16, 0.0);
  for (std::size_t e = 0; e < env_weights.size(); ++e) {
    for (int x1 = 0; x1 < 2; ++x1)
      for (int y = 0; y < 2; ++y)
        for (int x2 = 0; x2 < 2; ++x2)
          for (int x3 = 0; x3 < 2; ++x3) {
            joint.mass_[JointTable::Index(static_cast<int>(e), x1, y, x2, x3)] =
                env_weights[e] * Bernoulli(spec.prior_x1[e], x1) *
                Bernoulli(spec.y_given_x1[x1], y) *
                Bernoulli(spec.x2_given_y[y], x2) *
                Bernoulli(spec.x3_given_x1x2[2 * x1 + x2], x3);
          }
  }
  return joint;
}

double Conditional(const JointTable& joint, Variable target,
                   const Assignment& given) {
  if (target == Variable::kE) {
    throw InvalidArgument("E is not binary; condition on it instead");
  }
  if (given.has(target)) {
    throw InvalidArgument(std::string(VariableName(target)) +
                          " appears in its own conditioning set");
  }
  const double denom = joint.Probability(given);
  if (!(denom > 0.0)) {
    throw UndefinedConditional("P(" + std::string(VariableName(target)) + " | " +
                               given.ToString() +
                               ") is undefined: conditioning event has zero mass");
  }
  Assignment event = given;
  event.set(target, 1);
  return std::clamp(joint.Probability(event) / denom, 0.0, 1.0);
}

double BinaryEntropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
  return h;
}

double ConditionalEntropy(const JointTable& joint, FeatureSubset z,
                          bool condition_on_env) {
  const std::size_t groups = (condition_on_env ? joint.num_envs() : 1) * 8;
  std::vector<double> m0(groups, 0.0), m1(groups, 0.0);
  for (std::size_t e = 0; e < joint.num_envs(); ++e) {
    const std::size_t base = condition_on_env ? e * 8 : 0;
    for (int x1 = 0; x1 < 2; ++x1)
      for (int y = 0; y < 2; ++y)
        for (int x2 = 0; x2 < 2; ++x2)
          for (int x3 = 0; x3 < 2; ++x3) {
            const std::size_t key = base + ProjectZ(z, x1, x2, x3);
            (y ? m1 : m0)[key] += joint.mass(static_cast<int>(e), x1, y, x2, x3);
          }
  }
  double h = 0.0;
  for (std::size_t k = 0; k < groups; ++k) {
    const double total = m0[k] + m1[k];
    if (total > 0.0) h += total * BinaryEntropy(m1[k] / total);
  }
  return h;
}

double MutualInformation(const JointTable& joint, FeatureSubset z) {
  const double mi = ConditionalEntropy(joint, FeatureSubset(), false) -
                    ConditionalEntropy(joint, z, false);
  return std::max(0.0, mi);
}

bool IsInvariant(const JointTable& joint, FeatureSubset z, double tol) {
  if (!(tol >= 0.0)) throw InvalidArgument("invariance tolerance must be >= 0");
  return ConditionalEntropy(joint, z, false) -
             ConditionalEntropy(joint, z, true) <=
         tol;
}

double AdversarialTestLoss(const JointTable& train,
                           const AdversarialPriors& test, FeatureSubset z) {
  test.Validate();
  const CostTable table(train);
  const auto it = std::find(table.subsets.begin(), table.subsets.end(), z);
  return table.Loss(static_cast<std::size_t>(it - table.subsets.begin()),
                    TestMasses(train.y_given_x1(), test));
}

MinimaxReport MinimaxOverPriors(const JointTable& train,
                                std::span<const AdversarialPriors> candidates) {
  if (candidates.empty()) throw InvalidArgument("no adversarial candidates");
  const CostTable table(train);
  Maximizer max(table);
  for (const auto& pi : candidates) {
    pi.Validate();
    max.Offer(train.y_given_x1(), pi);
  }
  return std::move(max).Finish();
}

MinimaxReport VerifyMinimaxSaddlePoint(const BinaryGraphSpec& spec,
                                       std::span<const double> env_weights,
                                       std::span<const double> grid) {
  if (grid.empty()) throw InvalidArgument("adversary grid is empty");
  for (double g : grid) CheckProbability(g, "grid value");
  const JointTable train = BuildJoint(spec, env_weights);
  const CostTable table(train);
  Maximizer max(table);

  // Odometer over the nine adversary parameters, last axis fastest.
  const std::size_t n = grid.size();
  std::array<std::size_t, 9> idx{};
  AdversarialPriors pi;
  while (true) {
    pi.x1 = grid[idx[0]];
    for (int k = 0; k < 4; ++k) {
      pi.x2_given_x1y[k] = grid[idx[1 + k]];
      pi.x3_given_x1x2[k] = grid[idx[5 + k]];
    }
    max.Offer(train.y_given_x1(), pi);
    int axis = 8;
    while (axis >= 0 && ++idx[axis] == n) idx[axis--] = 0;
    if (axis < 0) break;
  }
  return std::move(max).Finish();
}

std::vector<double> MidpointGrid(int n) {
  if (n < 1) throw InvalidArgument("grid needs at least one point");
  std::vector<double> grid(n);
  for (int k = 0; k < n; ++k) grid[k] = (2.0 * k + 1.0) / (2.0 * n);
  return grid;
}

}  // namespace invrat::oracle
