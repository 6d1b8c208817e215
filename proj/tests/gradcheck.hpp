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

// Central finite-difference gradient checks for tape ops.
//
// The op output is contracted with a random weight array w drawn per point,
// so the scalar probed is L = sum(w * op(inputs)). The analytic gradient of
// every input element is compared with (L(x + h) - L(x - h)) / 2h; the error
// is |a - n| / max(|a|, |n|, 1e-3), i.e. relative except for gradients
// below 1e-3, which are held to the matching absolute bound.

#ifndef INVRAT_TESTS_GRADCHECK_HPP_
#define INVRAT_TESTS_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "invrat/rng.hpp"
#include "invrat/tape.hpp"

namespace invrat::testing {

using OpBuilder = std::function<Var(Tape&, std::vector<Var>&)>;

struct GradCheckResult {
  bool pass = true;
  double worst = 0.0;
  int worst_point = -1;
  std::size_t worst_input = 0;
  std::size_t worst_element = 0;
};

inline constexpr double kGradRelTol = 1e-4;
inline constexpr double kFdStep = 1e-5;
inline constexpr int kGradPoints = 20;

// `surrogate`, when given, defines the function whose finite differences the
// analytic gradient of `build` must match (used for straight-through ops).
inline GradCheckResult CheckGradients(const std::vector<Shape>& shapes, const OpBuilder& build,
                                      const std::function<double(Rng&)>& sample,
                                      std::uint64_t seed, const OpBuilder& surrogate = {},
                                      int points = kGradPoints) {
  GradCheckResult result;
  Rng rng(seed);
  const OpBuilder& reference = surrogate ? surrogate : build;
  for (int point = 0; point < points; ++point) {
    ParameterStore store;
    std::vector<Parameter*> params;
    for (std::size_t k = 0; k < shapes.size(); ++k) {
      Parameter& p = store.add("x" + std::to_string(k), shapes[k]);
      for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] = sample(rng);
      params.push_back(&p);
    }
    Array weights;
    auto loss = [&](const OpBuilder& op, bool backward) {
      Tape tape;
      std::vector<Var> vars;
      for (Parameter* p : params) vars.push_back(tape.parameter(*p));
      const Var out = op(tape, vars);
      if (weights.size() == 0) {
        weights = Array(out.shape());
        for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = rng.normal();
      }
      const Var l = Sum(Mul(out, tape.constant(weights)));
      if (backward) tape.backward(l);
      return l.value().item();
    };
    store.zero_grad();
    loss(build, true);
    for (std::size_t k = 0; k < params.size(); ++k) {
      Parameter& p = *params[k];
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double saved = p.value[i];
        p.value[i] = saved + kFdStep;
        const double up = loss(reference, false);
        p.value[i] = saved - kFdStep;
        const double down = loss(reference, false);
        p.value[i] = saved;
        const double numeric = (up - down) / (2.0 * kFdStep);
        const double analytic = p.grad[i];
        const double err = std::abs(analytic - numeric) /
                           std::max({std::abs(analytic), std::abs(numeric), 1e-3});
        if (err > result.worst) {
          result.worst = err;
          result.worst_point = point;
          result.worst_input = k;
          result.worst_element = i;
        }
      }
    }
  }
  result.pass = result.worst <= kGradRelTol;
  return result;
}

}  // namespace invrat::testing

#endif  // INVRAT_TESTS_GRADCHECK_HPP_
