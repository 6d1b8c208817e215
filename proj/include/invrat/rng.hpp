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

#ifndef INVRAT_RNG_HPP_
#define INVRAT_RNG_HPP_

#include <cstdint>
#include <random>

namespace invrat {

// Portable random source. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; all distributions are implemented
// here rather than taken from <random>, whose distribution algorithms are
// implementation-defined. Streams therefore reproduce bit-for-bit across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; consumes two uniforms per call, no caching.
  double normal();

  // splitmix64 finalizer over (seed, stream); used to give every worker,
  // example or run its own independent seed.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

}  // namespace invrat

#endif  // INVRAT_RNG_HPP_
