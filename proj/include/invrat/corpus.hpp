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

// Corpus files are line-delimited JSON, version 1. The first line is a
// header, every following line one example:
//
//   {"format":"invrat-corpus","version":1,"kind":"bias","seq_len":20,
//    "num_envs":2,"count":8000,"config":{...}}
//   {"tokens":[0,7,...],"label":1,"env":0,"truth":[3],"bias":[0],
//    "split":"train"}
//
// "truth" and "bias" list positions. "env" is null outside the training
// environments. The vocabulary sidecar `<path>.vocab` holds one token per
// line, line k naming token id k.

#ifndef INVRAT_CORPUS_HPP_
#define INVRAT_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace invrat {

enum class Split { kTrain, kHoldout, kVal, kTest };

std::string_view SplitName(Split s);
Split ParseSplit(std::string_view name);

struct Example {
  std::vector<int> tokens;
  int label = 0;
  int env = -1;                     // -1: no environment id available
  std::vector<std::uint8_t> truth;  // ground-truth rationale, per position
  std::vector<std::uint8_t> bias;   // injected spurious positions
  Split split = Split::kTrain;

  bool operator==(const Example&) const = default;
};

struct Corpus {
  std::string kind;                 // "bias", "aspect", ...
  std::vector<std::string> vocab;
  std::size_t seq_len = 0;
  int num_envs = 0;
  std::string config_json = "{}";   // generator settings, for provenance
  std::vector<Example> examples;

  std::vector<const Example*> split(Split s) const;
  std::size_t count(Split s) const;

  // Throws InvalidArgument describing the first broken invariant.
  void Validate() const;

  bool operator==(const Corpus&) const = default;
};

std::string VocabPath(const std::string& corpus_path);

std::string FormatCorpus(const Corpus& corpus);
// `vocab_text` is the sidecar contents; errors carry the offending line.
Corpus ParseCorpus(const std::string& text, const std::string& vocab_text);

void SaveCorpus(const std::string& path, const Corpus& corpus);
Corpus LoadCorpus(const std::string& path);

}  // namespace invrat

#endif  // INVRAT_CORPUS_HPP_
