// Copyright 2026 The im2recipe Authors. All Rights Reserved.
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


#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("im2recipe_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = "cd '" + dir_.string() + "' && '" IM2RECIPE_CLI "' -q " + args + " > stdout.txt 2> stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

constexpr const char* kTinyTrain =
    " --wordvec-dim 8 --wordvec-epochs 1 --skip-dim 8 --skip-epochs 1 --ingredient-hidden 4"
    " --instruction-hidden 4 --embed-dim 8 --max-epochs 2 --patience 1 --val-repeats 1";

TEST_F(Cli, GenSyntheticIsDeterministic) {
  ASSERT_EQ(run("gen-synthetic --recipes 60 --categories 5 --seed 7 --out-dir a"), 0);
  ASSERT_EQ(run("gen-synthetic --recipes 60 --categories 5 --seed 7 --out-dir b"), 0);
  EXPECT_EQ(slurp(dir_ / "a/layer1.jsonl"), slurp(dir_ / "b/layer1.jsonl"));
  EXPECT_EQ(slurp(dir_ / "a/layer2.jsonl"), slurp(dir_ / "b/layer2.jsonl"));
  ASSERT_EQ(run("gen-synthetic --recipes 60 --categories 5 --seed 8 --out-dir c"), 0);
  EXPECT_NE(slurp(dir_ / "a/layer2.jsonl"), slurp(dir_ / "c/layer2.jsonl"));
}

TEST_F(Cli, WritesResolvedConfig) {
  ASSERT_EQ(run("gen-synthetic --recipes 30 --out-dir a --seed 5"), 0);
  const auto cfg = nlohmann::json::parse(slurp(dir_ / "a/config.json"));
  EXPECT_EQ(cfg["command"], "gen-synthetic");
  EXPECT_EQ(cfg["options"]["recipes"], 30);
  EXPECT_EQ(cfg["options"]["seed"], 5);
  EXPECT_EQ(cfg["options"]["categories"], 10);
}

TEST_F(Cli, ConfigFileOverridesFlags) {
  std::ofstream(dir_ / "cfg.json") << R"({"recipes": 25, "out_dir": "fromfile"})";
  ASSERT_EQ(run("gen-synthetic --recipes 40 --out-dir a --config cfg.json"), 0);
  const auto cfg = nlohmann::json::parse(slurp(dir_ / "fromfile/config.json"));
  EXPECT_EQ(cfg["options"]["recipes"], 25);
  std::ofstream(dir_ / "bad.json") << R"({"recipez": 25})";
  EXPECT_NE(run("gen-synthetic --config bad.json"), 0);
}

TEST_F(Cli, UsageAndInputErrorsAreNonzero) {
  EXPECT_NE(run("gen-synthetic --no-such-flag"), 0);
  EXPECT_NE(run("no-such-command"), 0);
  EXPECT_NE(run("stats --layer1 missing.jsonl"), 0);
  std::ofstream(dir_ / "bad.jsonl") << "{\"id\": 1}\n";
  EXPECT_EQ(run("stats --layer1 bad.jsonl"), 3);
  EXPECT_NE(slurp(dir_ / "stderr.txt").find("bad.jsonl:1"), std::string::npos);
}

TEST_F(Cli, PipelineIsReproducible) {
  ASSERT_EQ(run("gen-synthetic --recipes 40 --categories 4 --seed 3 --out-dir syn"), 0);
  const std::string data = " --layer1 syn/layer1.jsonl --layer2 syn/layer2.jsonl";
  for (const char* m : {"m1", "m2"}) {
    ASSERT_EQ(run(std::string("train-joint") + data + " --model-dir " + m + kTinyTrain), 0);
    ASSERT_EQ(run(std::string("evaluate") + data + " --model-dir " + m + " --partition all --n 20 --repeats 3 --out " +
                  m + "/report.json"),
              0);
  }
  for (const char* f : {"joint.ckpt", "word_vectors.txt", "skip", "categories.json", "train_log.jsonl", "report.json"}) {
    EXPECT_EQ(slurp(dir_ / "m1" / f), slurp(dir_ / "m2" / f)) << f;
  }
  const auto rep = nlohmann::json::parse(slurp(dir_ / "m1/report.json"));
  EXPECT_EQ(rep["n"], 20);
  EXPECT_EQ(rep["per_repeat"].size(), 3u);
}

TEST_F(Cli, TrainJointUsesPretrainedParts) {
  ASSERT_EQ(run("gen-synthetic --recipes 40 --categories 4 --seed 3 --out-dir syn"), 0);
  ASSERT_EQ(run("train-wordvec --layer1 syn/layer1.jsonl --dim 6 --epochs 1 --out wv.txt"), 0);
  ASSERT_EQ(run("train-skip --layer1 syn/layer1.jsonl --dim 5 --embed-dim 4 --epochs 1 --out sk"), 0);
  ASSERT_EQ(run("categories --layer1 syn/layer1.jsonl --out cats.json"), 0);
  ASSERT_EQ(run(std::string("train-joint --layer1 syn/layer1.jsonl --layer2 syn/layer2.jsonl --model-dir m") +
                " --word-vectors wv.txt --skip sk --categories cats.json" + kTinyTrain),
            0);
  EXPECT_EQ(slurp(dir_ / "m/word_vectors.txt"), slurp(dir_ / "wv.txt"));
  EXPECT_EQ(slurp(dir_ / "m/skip"), slurp(dir_ / "sk"));
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "m/categories.json")), nlohmann::json::parse(slurp(dir_ / "cats.json")));
  ASSERT_EQ(run("analyze --layer1 syn/layer1.jsonl --layer2 syn/layer2.jsonl --model-dir m --partition all"
                " --analogy 'chocolate cake,cake,stew' --interpolate 'cake,stew' --unit 1 --k 3 --out-dir an"),
            0);
  const std::string tsv = slurp(dir_ / "an/neighbors.tsv");
  EXPECT_EQ(tsv.substr(0, tsv.find('\n')), "query\trank\titem_id\ttitle\tcosine");
  EXPECT_TRUE(fs::exists(dir_ / "an/units.tsv"));
}

TEST_F(Cli, DedupAndIngestRoundTrip) {
  ASSERT_EQ(run("gen-synthetic --recipes 30 --categories 3 --seed 4 --out-dir syn"), 0);
  ASSERT_EQ(run("ingest --layer1 syn/layer1.jsonl --layer2 syn/layer2.jsonl --layer2-format bin --out-dir ing"), 0);
  ASSERT_EQ(run("ingest --layer1 ing/layer1.jsonl --layer2 ing/layer2.bin --out-dir ing2"), 0);
  EXPECT_EQ(slurp(dir_ / "syn/layer2.jsonl"), slurp(dir_ / "ing2/layer2.jsonl"));
  ASSERT_EQ(run("dedup --layer1 syn/layer1.jsonl --layer2 syn/layer2.jsonl --out-dir d1"), 0);
  ASSERT_EQ(run("dedup --layer1 syn/layer1.jsonl --layer2 d1/layer2.jsonl --out-dir d2"), 0);
  EXPECT_EQ(slurp(dir_ / "d1/layer2.jsonl"), slurp(dir_ / "d2/layer2.jsonl"));
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "d2/dedup_report.json"))["removed"], 0);
}

TEST_F(Cli, NutritionWritesRecords) {
  std::ofstream(dir_ / "l1.jsonl")
      << R"({"id":"a","title":"milk","ingredients":["2 cups milk"],"instructions":["pour"],"partition":"training"})"
      << "\n"
      << R"({"id":"b","title":"x","ingredients":["1 pinch salt"],"instructions":["add"],"partition":"training"})"
      << "\n";
  std::ofstream(dir_ / "t.tsv") << "name\tenergy\tprotein\tsugar\tfat\tsaturates\tsalt\nmilk\t64\t3.3\t5.05\t3.6\t2.3\t0.1\n";
  ASSERT_EQ(run("nutrition --recipes l1.jsonl --table t.tsv --out out.jsonl"), 0);
  const auto summary = nlohmann::json::parse(slurp(dir_ / "out.jsonl.summary.json"));
  EXPECT_EQ(summary["complete"], 1);
  std::ifstream in(dir_ / "out.jsonl");
  std::string first;
  std::getline(in, first);
  const auto rec = nlohmann::json::parse(first);
  EXPECT_NEAR(rec["nutrition"]["total"]["sugar"].get<double>(), 24.644, 1e-9);
}

}  // namespace
