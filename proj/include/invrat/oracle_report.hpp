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

#ifndef INVRAT_ORACLE_REPORT_HPP_
#define INVRAT_ORACLE_REPORT_HPP_

#include <optional>
#include <string>
#include <vector>

#include "invrat/graph_file.hpp"
#include "invrat/oracle.hpp"

namespace invrat::oracle {

struct ConditionalRow {
  std::string label;             // e.g. "P(Y=1 | X2=1, E=e2)"
  std::optional<double> value;   // empty when the event has zero mass
  std::optional<double> expected;
  double tol = 0.0;
  bool pass = true;
};

struct InvarianceRow {
  FeatureSubset subset;
  double h_y_given_z = 0.0;
  double h_y_given_ze = 0.0;
  double mutual_information = 0.0;
  bool invariant = false;
};

struct OracleReport {
  std::vector<ConditionalRow> conditionals;
  std::vector<InvarianceRow> invariance;
  double invariance_tol = 1e-6;
  std::optional<MinimaxReport> minimax;  // absent when grid_points == 0
  bool fixtures_checked = false;

  bool fixtures_pass() const;
};

struct OracleOptions {
  int grid_points = 5;          // 0 skips the saddle-point search
  double invariance_tol = 1e-6;
  // Compare env "e1" / "e2" conditionals against the reference values.
  bool check_fixtures = false;
};

OracleReport RunOracle(const GraphFile& graph, const OracleOptions& options);

std::string FormatOracleTable(const OracleReport& report);
std::string OracleReportJson(const OracleReport& report);

}  // namespace invrat::oracle

#endif  // INVRAT_ORACLE_REPORT_HPP_
