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

#ifndef INVRAT_ADAM_HPP_
#define INVRAT_ADAM_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "invrat/array.hpp"
#include "invrat/tape.hpp"

namespace invrat {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam over a fixed, ordered list of parameters.
class AdamState {
 public:
  AdamState(AdamOptions options, std::vector<Parameter*> params);

  const AdamOptions& options() const { return options_; }
  std::int64_t step_count() const { return step_; }
  const std::vector<Parameter*>& params() const { return params_; }

  // Applies one update from each parameter's current grad.
  void step();

 private:
  AdamOptions options_;
  std::vector<Parameter*> params_;
  std::vector<Array> first_moment_;
  std::vector<Array> second_moment_;
  std::int64_t step_ = 0;
};

}  // namespace invrat

#endif  // INVRAT_ADAM_HPP_
