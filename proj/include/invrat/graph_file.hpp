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

// Graph spec files (JSON):
//
//   {
//     "format": "invrat-graph", "version": 1,
//     "envs": [ {"id": "e1", "prior_x1": 0.5, "weight": 0.5}, ... ],
//     "cond_y_given_x1":    {"0": 0.1, "1": 0.9},
//     "cond_x2_given_y":    {"0": 0.1, "1": 0.9},
//     "cond_x3_given_x1x2": {"00": 0.0, "01": 0.5, "10": 0.5, "11": 1.0}
//   }
//
// Table keys are the parent values (X1 first). "weight" is optional; when
// every env omits it the pooling is uniform.

#ifndef INVRAT_GRAPH_FILE_HPP_
#define INVRAT_GRAPH_FILE_HPP_

#include <string>
#include <vector>

#include "invrat/oracle.hpp"

namespace invrat::oracle {

struct GraphFile {
  BinaryGraphSpec spec;
  std::vector<double> env_weights;
};

// Throws ParseError (with a 1-based line when one can be located).
GraphFile ParseGraphText(const std::string& text);
std::string FormatGraphText(const GraphFile& file);

GraphFile LoadGraphFile(const std::string& path);
void SaveGraphFile(const std::string& path, const GraphFile& file);

// "shift", "toy" or "uniform", with uniform env weights.
GraphFile PresetGraph(const std::string& name);

}  // namespace invrat::oracle

#endif  // INVRAT_GRAPH_FILE_HPP_
