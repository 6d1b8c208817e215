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

#include "invrat/oracle_report.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "invrat/error.hpp"
#include "json.hpp"

namespace invrat::oracle {
namespace {

constexpr Variable kFeatureVars[3] = {Variable::kX1, Variable::kX2, Variable::kX3};

// Reference values, rounded to three decimals, keyed by (env, feature, y).
struct Fixture {
  double value;
  double tol;
};

std::optional<Fixture> LookupFixture(const std::string& env, int feature, int y) {
  if (env == "e1" && y == 1) return Fixture{0.9, 1e-12};
  if (env == "e2") {
    static const std::map<std::pair<int, int>, double> kE2 = {
        {{1, 1}, 0.926}, {{1, 0}, 0.867}, {{2, 1}, 0.912}, {{2, 0}, 0.883}};
    const auto it = kE2.find({feature, y});
    if (it != kE2.end()) return Fixture{it->second, 5e-4};
  }
  return std::nullopt;
}

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

}  // namespace

bool OracleReport::fixtures_pass() const {
  for (const auto& row : conditionals) {
    if (!row.pass) return false;
  }
  return true;
}

OracleReport RunOracle(const GraphFile& graph, const OracleOptions& options) {
  OracleReport report;
  report.fixtures_checked = options.check_fixtures;
  report.invariance_tol = options.invariance_tol;
  const JointTable joint = BuildJoint(graph.spec, graph.env_weights);

  for (std::size_t e = 0; e < graph.spec.envs.size(); ++e) {
    const std::string& env = graph.spec.envs[e];
    for (int k = 0; k < 3; ++k) {
      for (int y : {1, 0}) {
        ConditionalRow row;
        row.label = "P(Y=" + std::to_string(y) + " | X" + std::to_string(k + 1) +
                    "=" + std::to_string(y) + ", E=" + env + ")";
        try {
          const double p1 = Conditional(
              joint, Variable::kY,
              Assignment{{kFeatureVars[k], y}, {Variable::kE, static_cast<int>(e)}});
          row.value = y ? p1 : 1.0 - p1;
        } catch (const UndefinedConditional&) {
        }
        if (options.check_fixtures) {
          if (auto fx = LookupFixture(env, k, y)) {
            row.expected = fx->value;
            row.tol = fx->tol;
            row.pass = row.value && std::abs(*row.value - fx->value) <= fx->tol;
          }
        }
        report.conditionals.push_back(std::move(row));
      }
    }
  }

  for (FeatureSubset z : FeatureSubset::PowerSet()) {
    InvarianceRow row;
    row.subset = z;
    row.h_y_given_z = ConditionalEntropy(joint, z, false);
    row.h_y_given_ze = ConditionalEntropy(joint, z, true);
    row.mutual_information = MutualInformation(joint, z);
    row.invariant = IsInvariant(joint, z, options.invariance_tol);
    report.invariance.push_back(row);
  }

  if (options.grid_points > 0) {
    const auto grid = MidpointGrid(options.grid_points);
    report.minimax = VerifyMinimaxSaddlePoint(graph.spec, graph.env_weights, grid);
  }
  return report;
}

std::string FormatOracleTable(const OracleReport& report) {
  std::string out = "conditionals\n";
  for (const auto& row : report.conditionals) {
    out += "  " + row.label;
    out.append(row.label.size() < 26 ? 26 - row.label.size() : 1, ' ');
    out += row.value ? Fmt("%.6f", *row.value) : std::string("undefined");
    if (row.expected) {
      out += "  expect " + Fmt("%.3f", *row.expected) + " +/- " +
             Fmt("%.0e", row.tol) + (row.pass ? "  ok" : "  FAIL");
    }
    out += "\n";
  }

  out += "\ninvariance (tol " + Fmt("%.0e", report.invariance_tol) + ")\n";
  out += "  subset        H(Y|Z)    H(Y|Z,E)  I(Y;Z)    invariant\n";
  for (const auto& row : report.invariance) {
    const std::string name = row.subset.ToString();
    out += "  " + name + std::string(14 - name.size(), ' ') +
           Fmt("%.6f  ", row.h_y_given_z) + Fmt("%.6f  ", row.h_y_given_ze) +
           Fmt("%.6f  ", row.mutual_information) + (row.invariant ? "yes" : "no") +
           "\n";
  }

  if (report.minimax) {
    const auto& mm = *report.minimax;
    out += "\nadversarial worst-case test loss (" + std::to_string(mm.candidates) +
           " priors)\n";
    out += "  subset        max loss  pi1   pi2 (x1y=00,01,10,11)  pi3 (x1x2=00,01,10,11)\n";
    for (const auto& row : mm.rows) {
      const std::string name = row.subset.ToString();
      std::string line = "  " + name + std::string(14 - name.size(), ' ') +
                         Fmt("%.6f  ", row.max_loss) + Fmt("%.2f  ", row.worst.x1);
      for (double v : row.worst.x2_given_x1y) line += Fmt("%.2f ", v);
      line += "   ";
      for (double v : row.worst.x3_given_x1x2) line += Fmt("%.2f ", v);
      out += line + "\n";
    }
    out += "  minimizers:";
    for (const auto& z : mm.minimizers) out += " " + z.ToString();
    out += "\n  winner: " + mm.winner.ToString() +
           (mm.conclusive ? "" : " (inconclusive: tie broken by size, then order)") +
           "\n";
  }
  if (report.fixtures_checked) {
    out += std::string("\nfixtures: ") + (report.fixtures_pass() ? "pass" : "FAIL") + "\n";
  }
  return out;
}

std::string OracleReportJson(const OracleReport& report) {
  using json = nlohmann::json;
  json doc = json::object();
  json conds = json::array();
  for (const auto& row : report.conditionals) {
    json r = {{"label", row.label}};
    r["value"] = row.value ? json(*row.value) : json(nullptr);
    if (row.expected) {
      r["expected"] = *row.expected;
      r["tol"] = row.tol;
      r["pass"] = row.pass;
    }
    conds.push_back(r);
  }
  doc["conditionals"] = conds;
  json inv = json::array();
  for (const auto& row : report.invariance) {
    inv.push_back({{"subset", row.subset.ToString()},
                   {"h_y_given_z", row.h_y_given_z},
                   {"h_y_given_ze", row.h_y_given_ze},
                   {"mutual_information", row.mutual_information},
                   {"invariant", row.invariant}});
  }
  doc["invariance_tol"] = report.invariance_tol;
  doc["invariance"] = inv;
  if (report.minimax) {
    const auto& mm = *report.minimax;
    json rows = json::array();
    for (const auto& row : mm.rows) {
      rows.push_back({{"subset", row.subset.ToString()},
                      {"max_loss", row.max_loss},
                      {"worst_pi1", row.worst.x1},
                      {"worst_pi2", row.worst.x2_given_x1y},
                      {"worst_pi3", row.worst.x3_given_x1x2}});
    }
    json mins = json::array();
    for (const auto& z : mm.minimizers) mins.push_back(z.ToString());
    doc["minimax"] = {{"candidates", mm.candidates},
                      {"rows", rows},
                      {"minimizers", mins},
                      {"winner", mm.winner.ToString()},
                      {"conclusive", mm.conclusive}};
  }
  if (report.fixtures_checked) doc["fixtures_pass"] = report.fixtures_pass();
  return doc.dump(2) + "\n";
}

}  // namespace invrat::oracle
