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

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>

#include "doctest.h"
#include "invrat/checkpoint.hpp"
#include "invrat/corpus.hpp"
#include "invrat/datagen.hpp"
#include "invrat/error.hpp"
#include "invrat/graph_file.hpp"
#include "invrat/io.hpp"

namespace invrat {
namespace {

namespace fs = std::filesystem;

fs::path TempPath(const std::string& name) {
  return fs::temp_directory_path() / ("invrat_io_test_" + name);
}

TEST_SUITE("io") {
  TEST_CASE("files: atomic write, read back, missing file") {
    const fs::path dir = TempPath("dir");
    fs::remove_all(dir);
    const std::string path = (dir / "nested" / "a.txt").string();
    WriteFileAtomic(path, "hello\n");
    CHECK(ReadFile(path) == "hello\n");
    WriteFileAtomic(path, "replaced");
    CHECK(ReadFile(path) == "replaced");
    fs::remove_all(dir);
    CHECK_THROWS_AS(ReadFile(path), IoError);
  }

  TEST_CASE("checkpoint: bytes round trip exactly, including extreme values") {
    ParameterStore store;
    Parameter& a = store.add("g.a", {2, 3});
    Parameter& b = store.add("fi.b", {4});
    for (std::size_t i = 0; i < a.value.size(); ++i) a.value[i] = 0.1 * i - 0.25;
    b.value[0] = std::numeric_limits<double>::denorm_min();
    b.value[1] = -0.0;
    b.value[2] = 1e308;
    b.value[3] = -1.0 / 3.0;
    const std::string bytes = EncodeCheckpoint(store, "{\"x\":1}");
    const Checkpoint ckpt = DecodeCheckpoint(bytes);
    CHECK(ckpt.config_text == "{\"x\":1}");
    ParameterStore fresh;
    fresh.add("g.a", {2, 3});
    fresh.add("fi.b", {4});
    RestoreParameters(ckpt, fresh);
    CHECK(fresh.checksum() == store.checksum());
    CHECK(EncodeCheckpoint(fresh, "{\"x\":1}") == bytes);
    CHECK(std::signbit(fresh.get("fi.b").value[1]));
  }

  TEST_CASE("checkpoint: corrupt and mismatched payloads are rejected") {
    ParameterStore store;
    store.add("w", {2});
    const std::string bytes = EncodeCheckpoint(store, "{}");
    CHECK_THROWS_AS(DecodeCheckpoint("NOTACKPT"), ParseError);
    CHECK_THROWS_AS(DecodeCheckpoint(bytes.substr(0, bytes.size() - 3)), ParseError);
    CHECK_THROWS_AS(DecodeCheckpoint(bytes + "x"), ParseError);
    ParameterStore other;
    other.add("w", {3});
    CHECK_THROWS_AS(RestoreParameters(DecodeCheckpoint(bytes), other), ShapeError);
    CHECK_THROWS_AS(LoadCheckpoint(TempPath("missing.ckpt").string()), IoError);
  }

  TEST_CASE("graph file: presets round trip through text") {
    for (const char* name : {"shift", "toy", "uniform"}) {
      const oracle::GraphFile g = oracle::PresetGraph(name);
      const oracle::GraphFile back = oracle::ParseGraphText(oracle::FormatGraphText(g));
      CHECK(back.spec.envs == g.spec.envs);
      CHECK(back.spec.prior_x1 == g.spec.prior_x1);
      CHECK(back.spec.y_given_x1 == g.spec.y_given_x1);
      CHECK(back.spec.x2_given_y == g.spec.x2_given_y);
      CHECK(back.spec.x3_given_x1x2 == g.spec.x3_given_x1x2);
      CHECK(back.env_weights == g.env_weights);
    }
    CHECK_THROWS_AS(oracle::PresetGraph("nope"), InvalidArgument);
  }

  TEST_CASE("graph file: errors carry the offending line") {
    const std::string missing =
        "{\n"
        "  \"envs\": [{\"id\": \"e1\", \"prior_x1\": 0.5}],\n"
        "  \"cond_y_given_x1\": {\"0\": 0.1, \"1\": 0.9},\n"
        "  \"cond_x2_given_y\": {\"0\": 0.1, \"1\": \"high\"},\n"
        "  \"cond_x3_given_x1x2\": {\"00\": 0.1, \"01\": 0.5, \"10\": 0.5, \"11\": 0.9}\n"
        "}\n";
    try {
      oracle::ParseGraphText(missing);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
    try {
      oracle::ParseGraphText("{\n  \"envs\": [\n  oops\n]}");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }

  TEST_CASE("corpus: text and file round trips are lossless") {
    BiasInjectionConfig cfg;
    cfg.train_per_env = 30;
    cfg.holdout_per_env = 10;
    cfg.val_count = 20;
    cfg.test_per_env = 15;
    const Corpus c = GenBiasCorpus(cfg);
    std::string vocab;
    for (const std::string& t : c.vocab) vocab += t + "\n";
    CHECK(ParseCorpus(FormatCorpus(c), vocab) == c);

    const fs::path dir = TempPath("corpus");
    fs::remove_all(dir);
    const std::string path = (dir / "corpus.jsonl").string();
    SaveCorpus(path, c);
    CHECK(fs::exists(VocabPath(path)));
    CHECK(LoadCorpus(path) == c);
    fs::remove_all(dir);
  }

  TEST_CASE("corpus: malformed records report their line") {
    BiasInjectionConfig cfg;
    cfg.train_per_env = 2;
    cfg.holdout_per_env = 1;
    cfg.val_count = 2;
    cfg.test_per_env = 1;
    const Corpus c = GenBiasCorpus(cfg);
    std::string vocab;
    for (const std::string& t : c.vocab) vocab += t + "\n";
    std::string text = FormatCorpus(c);
    // Break the third line.
    std::size_t pos = 0;
    for (int i = 0; i < 2; ++i) pos = text.find('\n', pos) + 1;
    text.insert(pos, "{bad json");
    try {
      ParseCorpus(text, vocab);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(ParseCorpus("", vocab), ParseError);
    CHECK_THROWS_AS(ParseCorpus("{\"format\":\"other\"}\n", vocab), ParseError);
  }

  TEST_CASE("splits parse by name") {
    for (Split s : {Split::kTrain, Split::kHoldout, Split::kVal, Split::kTest}) {
      CHECK(ParseSplit(SplitName(s)) == s);
    }
    CHECK_THROWS_AS(ParseSplit("dev2"), InvalidArgument);
  }
}

}  // namespace
}  // namespace invrat
