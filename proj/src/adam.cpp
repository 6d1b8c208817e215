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

#include "invrat/adam.hpp"

#include <cmath>

#include "invrat/error.hpp"

namespace invrat {

AdamState::AdamState(AdamOptions options, std::vector<Parameter*> params)
    : options_(options), params_(std::move(params)) {
  if (!(options_.learning_rate > 0.0) || options_.beta1 < 0.0 ||
      options_.beta1 >= 1.0 || options_.beta2 < 0.0 || options_.beta2 >= 1.0 ||
      !(options_.epsilon > 0.0)) {
    throw InvalidArgument("adam: invalid hyperparameters");
  }
  for (Parameter* p : params_) {
    first_moment_.emplace_back(p->value.shape());
    second_moment_.emplace_back(p->value.shape());
  }
}

void AdamState::step() {
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    if (p.grad.shape() != p.value.shape() ||
        first_moment_[i].shape() != p.value.shape()) {
      throw ShapeError("adam: parameter '" + p.name + "' changed shape");
    }
    Array& m = first_moment_[i];
    Array& v = second_moment_[i];
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      m[k] = b1 * m[k] + (1.0 - b1) * g;
      v[k] = b2 * v[k] + (1.0 - b2) * g * g;
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      p.value[k] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

}  // namespace invrat
