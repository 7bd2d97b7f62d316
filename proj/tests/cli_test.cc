// Copyright 2026 The Hydra Authors.
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
#include <vector>

#include <gtest/gtest.h>

#include "hydra/cli.h"
#include "hydra/error.h"

namespace hydra::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out, err;
};

Outcome Invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = Run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cli, HelpExitsZero) {
  const Outcome o = Invoke({"evaluate", "--help"});
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("--compare"), std::string::npos);
  EXPECT_EQ(Invoke({"--help"}).code, 0);
}

TEST(Cli, MissingCorpusIsReported) {
  const Outcome o = Invoke({"train", "--vocab", "v.txt", "--out-ckpt", "m.ckpt"});
  EXPECT_EQ(o.code, 1);
  EXPECT_EQ(o.err.rfind("missing-argument:", 0), 0u) << o.err;
  EXPECT_NE(o.err.find("corpus"), std::string::npos);
}

TEST(Cli, UnknownCommandIsUsageError) {
  const Outcome o = Invoke({"summarize"});
  EXPECT_EQ(o.code, 2);
  EXPECT_EQ(o.err.rfind("usage:", 0), 0u);
  EXPECT_EQ(Invoke({}).code, 2);
}

TEST(Cli, BadFlagValues) {
  const Outcome o = Invoke({"generate", "--min-length", "50", "--max-length", "10",
                            "--ckpt", "x", "--input", "y", "--out", "z"});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("min-length"), std::string::npos) << o.err;
  EXPECT_NE(o.err.find("max-length"), std::string::npos) << o.err;
  EXPECT_EQ(Invoke({"synth", "--n-examples", "many", "--out", "x"}).code, 1);
}

TEST(ResolveConfig, PresetsAndPrecedence) {
  EXPECT_EQ(ResolveConfig("paper", {}).decoding.beam_width, 5u);
  Overrides flags;
  flags.num_beams = 6;
  EXPECT_EQ(ResolveConfig("paper", flags).decoding.beam_width, 6u);
  const RunConfig desk = ResolveConfig("desk", {});
  EXPECT_EQ(desk.decoding.beam_width, 4u);
  EXPECT_DOUBLE_EQ(desk.train.learning_rate, 3e-4);
  EXPECT_EQ(desk.model.d_model, 64u);
  EXPECT_EQ(desk.model.shared_layers, 2u);
  const RunConfig paper = ResolveConfig("paper", {});
  EXPECT_EQ(paper.model.decoder_layers, 12u);
  EXPECT_EQ(paper.model.shared_layers, 8u);
  EXPECT_DOUBLE_EQ(ResolveConfig("paper", {}, Feature::kSpecificity).train.learning_rate, 2e-5);
  Overrides bad;
  bad.shared_layers = 4;
  try {
    ResolveConfig("desk", bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
    EXPECT_NE(std::string(e.what()).find("shared-layers"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("decoder-layers"), std::string::npos);
  }
  EXPECT_THROW(ResolveConfig("huge", {}), Error);
}

class Pipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "hydra_cli_pipeline";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string P(const std::string& name) const { return (dir_ / name).string(); }

  void Ok(std::vector<std::string> args) {
    const Outcome o = Invoke(args);
    ASSERT_EQ(o.code, 0) << args[0] << ": " << o.err;
  }

  fs::path dir_;
};

TEST_F(Pipeline, EndToEndWithManifests) {
  Ok({"synth", "--n-examples", "40", "--seed", "1", "--out", P("train.jsonl")});
  Ok({"synth", "--n-examples", "4", "--seed", "2", "--out", P("test.jsonl")});
  Ok({"build-vocab", "--corpus", P("train.jsonl"), "--corpus", P("test.jsonl"),
      "--out", P("vocab.txt")});
  Ok({"split", "--corpus", P("train.jsonl"), "--feature", "abstractiveness",
      "--out", P("split.jsonl")});
  Ok({"train", "--corpus", P("split.jsonl"), "--vocab", P("vocab.txt"), "--mode", "guided",
      "--d-model", "16", "--heads", "2", "--encoder-layers", "1", "--decoder-layers", "2",
      "--shared-layers", "1", "--ff-width", "32", "--epochs", "1", "--out-ckpt", P("m.ckpt")});
  const std::vector<std::string> gen = {"generate", "--ckpt", P("m.ckpt"), "--input",
                                        P("test.jsonl"), "--gate", "sweep", "--max-length", "6"};
  auto with_out = [&](std::string path) {
    auto args = gen;
    args.push_back("--out");
    args.push_back(std::move(path));
    return args;
  };
  Ok(with_out(P("gen.jsonl")));
  Ok({"evaluate", "--generated", P("gen.jsonl"), "--references", P("test.jsonl"),
      "--articles", P("test.jsonl"), "--compare", "manual:1,0;manual:0,1",
      "--out-report", P("report.jsonl")});
  for (const char* out : {"train.jsonl", "vocab.txt", "split.jsonl", "m.ckpt", "gen.jsonl",
                          "report.jsonl"}) {
    const fs::path manifest = dir_ / (std::string(out) + ".manifest.json");
    ASSERT_TRUE(fs::exists(manifest)) << manifest;
    const auto j = nlohmann::json::parse(Slurp(manifest));
    EXPECT_TRUE(j.contains("command"));
    EXPECT_TRUE(j.contains("seed"));
    EXPECT_TRUE(j.contains("config"));
  }
  std::size_t lines = 0;
  std::ifstream in(dir_ / "gen.jsonl");
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 4u * 5u);

  Ok(with_out(P("gen2.jsonl")));
  EXPECT_EQ(Slurp(dir_ / "gen.jsonl"), Slurp(dir_ / "gen2.jsonl"));
  auto m1 = nlohmann::json::parse(Slurp(dir_ / "gen.jsonl.manifest.json"));
  auto m2 = nlohmann::json::parse(Slurp(dir_ / "gen2.jsonl.manifest.json"));
  EXPECT_EQ(m1["config"], m2["config"]);
  EXPECT_EQ(m1["seed"], m2["seed"]);
}

TEST_F(Pipeline, SeedFromEnvironment) {
  ::setenv("HYDRA_SEED", "77", 1);
  Ok({"synth", "--n-examples", "3", "--out", P("a.jsonl")});
  ::unsetenv("HYDRA_SEED");
  Ok({"synth", "--n-examples", "3", "--seed", "77", "--out", P("b.jsonl")});
  EXPECT_EQ(Slurp(dir_ / "a.jsonl"), Slurp(dir_ / "b.jsonl"));
  const auto j = nlohmann::json::parse(Slurp(dir_ / "a.jsonl.manifest.json"));
  EXPECT_EQ(j["seed"], 77);
}

}  // namespace
}  // namespace hydra::cli
