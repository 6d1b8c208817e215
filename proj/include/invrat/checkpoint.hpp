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

// Parameter checkpoint format, version 1. All integers little-endian.
//
//   bytes 0..7   magic "INVRATCK"
//   u32          format version (1)
//   u64          length of the embedded config text, then that many bytes
//   u32          tensor count
//   per tensor:  u32 name length, name bytes,
//                u32 rank, u64 dims[rank],
//                f64 payload[prod(dims)]  (IEEE-754, row-major)

#ifndef INVRAT_CHECKPOINT_HPP_
#define INVRAT_CHECKPOINT_HPP_

#include <string>
#include <utility>
#include <vector>

#include "invrat/array.hpp"
#include "invrat/tape.hpp"

namespace invrat {

inline constexpr char kCheckpointMagic[8] = {'I', 'N', 'V', 'R',
                                             'A', 'T', 'C', 'K'};
inline constexpr unsigned kCheckpointVersion = 1;

struct Checkpoint {
  std::string config_text;
  std::vector<std::pair<std::string, Array>> tensors;
};

std::string EncodeCheckpoint(const ParameterStore& store,
                             const std::string& config_text);
Checkpoint DecodeCheckpoint(const std::string& bytes);

void SaveCheckpoint(const std::string& path, const ParameterStore& store,
                    const std::string& config_text);
Checkpoint LoadCheckpoint(const std::string& path);

// Copies tensors into same-named, same-shaped parameters of `store`.
void RestoreParameters(const Checkpoint& ckpt, ParameterStore& store);

}  // namespace invrat

#endif  // INVRAT_CHECKPOINT_HPP_
