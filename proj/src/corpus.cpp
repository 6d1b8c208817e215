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

#include "invrat/corpus.hpp"

#include <sstream>

#include "invrat/error.hpp"
#include "invrat/io.hpp"
#include "json.hpp"

namespace invrat {
namespace {

using json = nlohmann::json;

json Positions(const std::vector<std::uint8_t>& mask) {
  json out = json::array();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::uint8_t> MaskFrom(const json& positions, std::size_t n,
                                   std::size_t line) {
  if (!positions.is_array()) throw ParseError("position list expected", line);
  std::vector<std::uint8_t> mask(n, 0);
  for (const json& p : positions) {
    if (!p.is_number_unsigned() || p.get<std::size_t>() >= n) {
      throw ParseError("position out of range", line);
    }
    mask[p.get<std::size_t>()] = 1;
  }
  return mask;
}

}  // namespace

std::string_view SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kHoldout: return "holdout";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "holdout") return Split::kHoldout;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw InvalidArgument("unknown split '" + std::string(name) +
                        "' (train, holdout, val, test)");
}

std::vector<const Example*> Corpus::split(Split s) const {
  std::vector<const Example*> out;
  for (const auto& ex : examples) {
    if (ex.split == s) out.push_back(&ex);
  }
  return out;
}

std::size_t Corpus::count(Split s) const {
  std::size_t n = 0;
  for (const auto& ex : examples) n += ex.split == s;
  return n;
}

void Corpus::Validate() const {
  if (seq_len == 0) throw InvalidArgument("corpus seq_len must be positive");
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Example& ex = examples[i];
    const std::string where = "example " + std::to_string(i) + ": ";
    if (ex.tokens.size() != seq_len || ex.truth.size() != seq_len ||
        ex.bias.size() != seq_len) {
      throw InvalidArgument(where + "length differs from seq_len " +
                            std::to_string(seq_len));
    }
    for (int t : ex.tokens) {
      if (t < 0 || static_cast<std::size_t>(t) >= vocab.size()) {
        throw InvalidArgument(where + "token id " + std::to_string(t) +
                              " outside the vocabulary");
      }
    }
    if (ex.label != 0 && ex.label != 1) throw InvalidArgument(where + "label not binary");
    if (ex.env >= num_envs) throw InvalidArgument(where + "env id out of range");
    if (ex.split == Split::kTrain && ex.env < 0) {
      throw InvalidArgument(where + "training example without env id");
    }
    if ((ex.split == Split::kVal || ex.split == Split::kTest) && ex.env >= 0) {
      throw InvalidArgument(where + "evaluation example exposes an env id");
    }
  }
}

std::string VocabPath(const std::string& corpus_path) {
  return corpus_path + ".vocab";
}

std::string FormatCorpus(const Corpus& corpus) {
  std::string out;
  json header = {{"format", "invrat-corpus"},
                 {"version", 1},
                 {"kind", corpus.kind},
                 {"seq_len", corpus.seq_len},
                 {"num_envs", corpus.num_envs},
                 {"count", corpus.examples.size()},
                 {"config", json::parse(corpus.config_json)}};
  out += header.dump() + "\n";
  for (const auto& ex : corpus.examples) {
    json rec = {{"tokens", ex.tokens},
                {"label", ex.label},
                {"env", ex.env >= 0 ? json(ex.env) : json(nullptr)},
                {"truth", Positions(ex.truth)},
                {"bias", Positions(ex.bias)},
                {"split", SplitName(ex.split)}};
    out += rec.dump() + "\n";
  }
  return out;
}

Corpus ParseCorpus(const std::string& text, const std::string& vocab_text) {
  Corpus corpus;
  {
    std::istringstream vs(vocab_text);
    std::string tok;
    while (std::getline(vs, tok)) corpus.vocab.push_back(tok);
  }
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("corpus: ") + e.what(), lineno);
    }
    try {
      if (lineno == 1) {
        if (rec.value("format", "") != "invrat-corpus") {
          throw ParseError("corpus: missing invrat-corpus header", lineno);
        }
        if (rec.at("version") != 1) throw ParseError("corpus: unsupported version", lineno);
        corpus.kind = rec.at("kind").get<std::string>();
        corpus.seq_len = rec.at("seq_len").get<std::size_t>();
        corpus.num_envs = rec.at("num_envs").get<int>();
        expected = rec.at("count").get<std::size_t>();
        corpus.config_json = rec.value("config", json::object()).dump();
        continue;
      }
      Example ex;
      ex.tokens = rec.at("tokens").get<std::vector<int>>();
      ex.label = rec.at("label").get<int>();
      ex.env = rec.at("env").is_null() ? -1 : rec.at("env").get<int>();
      ex.truth = MaskFrom(rec.at("truth"), ex.tokens.size(), lineno);
      ex.bias = MaskFrom(rec.at("bias"), ex.tokens.size(), lineno);
      ex.split = ParseSplit(rec.at("split").get<std::string>());
      corpus.examples.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw ParseError(std::string("corpus: ") + e.what(), lineno);
    } catch (const InvalidArgument& e) {
      throw ParseError(std::string("corpus: ") + e.what(), lineno);
    }
  }
  if (lineno == 0) throw ParseError("corpus: empty file", 0);
  if (corpus.examples.size() != expected) {
    throw ParseError("corpus: header promises " + std::to_string(expected) +
                         " examples, found " + std::to_string(corpus.examples.size()),
                     0);
  }
  try {
    corpus.Validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("corpus: ") + e.what(), 0);
  }
  return corpus;
}

void SaveCorpus(const std::string& path, const Corpus& corpus) {
  corpus.Validate();
  std::string vocab;
  for (const auto& tok : corpus.vocab) vocab += tok + "\n";
  WriteFileAtomic(VocabPath(path), vocab);
  WriteFileAtomic(path, FormatCorpus(corpus));
}

Corpus LoadCorpus(const std::string& path) {
  return ParseCorpus(ReadFile(path), ReadFile(VocabPath(path)));
}

}  // namespace invrat
