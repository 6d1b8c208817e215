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

#include "invrat/graph_file.hpp"

#include <algorithm>

#include "invrat/error.hpp"
#include "invrat/io.hpp"
#include "json.hpp"

namespace invrat::oracle {
namespace {

using json = nlohmann::json;

std::size_t LineOfOffset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + offset, '\n'));
}

// Best-effort line of the first occurrence of "key".
std::size_t LineOfKey(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : LineOfOffset(text, pos);
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void Fail(const std::string& key, const std::string& what) const {
    throw ParseError("graph file: " + what, LineOfKey(text_, key));
  }

  const json& Field(const json& obj, const std::string& key) const {
    if (!obj.is_object() || !obj.contains(key)) Fail(key, "missing key '" + key + "'");
    return obj.at(key);
  }

  double Number(const json& obj, const std::string& key) const {
    const json& v = Field(obj, key);
    if (!v.is_number()) Fail(key, "'" + key + "' must be a number");
    return v.get<double>();
  }

  template <std::size_t N>
  std::array<double, N> Table(const json& obj, const std::string& key,
                              const std::array<const char*, N>& cells) const {
    const json& t = Field(obj, key);
    if (!t.is_object() || t.size() != N) {
      Fail(key, "'" + key + "' must be a table with " + std::to_string(N) + " entries");
    }
    std::array<double, N> out{};
    // Cell keys repeat across tables, so errors point at the table's line.
    for (std::size_t k = 0; k < N; ++k) {
      if (!t.contains(cells[k]) || !t.at(cells[k]).is_number()) {
        Fail(key, "'" + key + "' entry '" + cells[k] + "' must be a number");
      }
      out[k] = t.at(cells[k]).template get<double>();
    }
    return out;
  }

 private:
  const std::string& text_;
};

}  // namespace

GraphFile ParseGraphText(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("graph file: ") + e.what(),
                     LineOfOffset(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  Reader r(text);
  if (!doc.is_object()) throw ParseError("graph file: top level must be an object", 1);
  if (doc.contains("format") && doc["format"] != "invrat-graph") {
    r.Fail("format", "unexpected format tag");
  }
  if (doc.contains("version") && doc["version"] != 1) {
    r.Fail("version", "unsupported version");
  }

  GraphFile file;
  const json& envs = r.Field(doc, "envs");
  if (!envs.is_array() || envs.empty()) r.Fail("envs", "'envs' must be a nonempty list");
  std::size_t weighted = 0;
  for (const json& env : envs) {
    const json& id = r.Field(env, "id");
    if (!id.is_string()) r.Fail("id", "env 'id' must be a string");
    file.spec.envs.push_back(id.get<std::string>());
    file.spec.prior_x1.push_back(r.Number(env, "prior_x1"));
    if (env.contains("weight")) {
      file.env_weights.push_back(r.Number(env, "weight"));
      ++weighted;
    }
  }
  if (weighted == 0) {
    file.env_weights = UniformWeights(file.spec.envs.size());
  } else if (weighted != file.spec.envs.size()) {
    r.Fail("weight", "either every env or none must carry a 'weight'");
  }
  file.spec.y_given_x1 = r.Table<2>(doc, "cond_y_given_x1", {"0", "1"});
  file.spec.x2_given_y = r.Table<2>(doc, "cond_x2_given_y", {"0", "1"});
  file.spec.x3_given_x1x2 =
      r.Table<4>(doc, "cond_x3_given_x1x2", {"00", "01", "10", "11"});

  try {
    BuildJoint(file.spec, file.env_weights);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("graph file: ") + e.what(), 0);
  }
  return file;
}

std::string FormatGraphText(const GraphFile& file) {
  json doc = json::object();
  doc["format"] = "invrat-graph";
  doc["version"] = 1;
  json envs = json::array();
  for (std::size_t e = 0; e < file.spec.envs.size(); ++e) {
    envs.push_back({{"id", file.spec.envs[e]},
                    {"prior_x1", file.spec.prior_x1[e]},
                    {"weight", file.env_weights.at(e)}});
  }
  doc["envs"] = envs;
  const auto& s = file.spec;
  doc["cond_y_given_x1"] = {{"0", s.y_given_x1[0]}, {"1", s.y_given_x1[1]}};
  doc["cond_x2_given_y"] = {{"0", s.x2_given_y[0]}, {"1", s.x2_given_y[1]}};
  doc["cond_x3_given_x1x2"] = {{"00", s.x3_given_x1x2[0]},
                               {"01", s.x3_given_x1x2[1]},
                               {"10", s.x3_given_x1x2[2]},
                               {"11", s.x3_given_x1x2[3]}};
  return doc.dump(2) + "\n";
}

GraphFile LoadGraphFile(const std::string& path) {
  return ParseGraphText(ReadFile(path));
}

void SaveGraphFile(const std::string& path, const GraphFile& file) {
  WriteFileAtomic(path, FormatGraphText(file));
}

GraphFile PresetGraph(const std::string& name) {
  GraphFile file;
  if (name == "shift") {
    file.spec = ShiftPreset();
  } else if (name == "toy") {
    file.spec = ToyPreset();
  } else if (name == "uniform") {
    file.spec = UniformPreset();
  } else {
    throw InvalidArgument("unknown preset '" + name + "' (shift, toy, uniform)");
  }
  file.env_weights = UniformWeights(file.spec.envs.size());
  return file;
}

}  // namespace invrat::oracle
