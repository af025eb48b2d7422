// Copyright 2026 The TDPM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "tdpm/cli.hpp"
#include "tdpm/csv.hpp"
#include "tdpm/eval.hpp"
#include "tdpm/trainer.hpp"

using namespace tdpm;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("tdpm_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

std::vector<std::string> tiny_flags(const std::string& iterations = "6") {
  return {"--width", "8", "--data_size", "100", "--batch_size", "50", "--iterations", iterations, "--log_every", "3"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST(Cli, GenerateDataDefaultsAndDeterminism) {
  const auto dir = temp_dir("gen");
  EXPECT_EQ(run({"generate-data", "--dataset", "swiss_roll", "--seed", "7", "--out", (dir / "a.csv").string()}).code, 0);
  EXPECT_EQ(line_count(dir / "a.csv"), 2001u);
  EXPECT_EQ(run({"generate-data", "--dataset", "swiss_roll", "--seed", "7", "--out", (dir / "b.csv").string()}).code, 0);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(run({"generate-data", "--dataset", "gmm8", "--n", "10", "--out", (dir / "c.csv").string()}).code, 0);
  EXPECT_EQ(line_count(dir / "c.csv"), 11u);
}

TEST(Cli, UnknownDatasetIsUsageErrorListingNames) {
  const auto dir = temp_dir("gen_bad");
  const Result r = run({"generate-data", "--dataset", "spiral", "--out", (dir / "a.csv").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("swiss_roll"), std::string::npos);
  EXPECT_NE(r.err.find("gmm25"), std::string::npos);
}

TEST(Cli, ParseErrorsAreUsage) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"generate-data"}).code, kExitUsage);
  EXPECT_EQ(run({"--version"}).code, kExitOk);
}

TEST(Cli, TrainMissingConfigIsIoErrorWithPath) {
  const Result r = run({"train", "--config", "/nonexistent/x.cfg", "--out_dir", "/tmp/unused"});
  EXPECT_EQ(r.code, kExitIo);
  EXPECT_NE(r.err.find("/nonexistent/x.cfg"), std::string::npos);
}

TEST(Cli, TrainRejectsBadKeysAndTrunc) {
  const auto dir = temp_dir("train_bad");
  {
    std::ofstream f(dir / "bad.cfg");
    f << "T = 5\nlearnrate = 3\n";
  }
  Result r = run({"train", "--config", (dir / "bad.cfg").string(), "--out_dir", (dir / "o").string()});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("learnrate"), std::string::npos);
  r = run(concat({"train", "--T", "5", "--T_trunc", "5", "--out_dir", (dir / "o2").string()}, tiny_flags()));
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_FALSE(fs::exists(dir / "o2" / "final.bin"));
  EXPECT_EQ(run({"train", "--T", "5"}).code, kExitUsage);
}

TEST(Cli, TrainResumeMatchesUnbrokenRun) {
  const auto dir = temp_dir("resume");
  ASSERT_EQ(run(concat({"train", "--out_dir", (dir / "full").string()}, tiny_flags())).code, 0);
  ASSERT_EQ(run(concat({"train", "--out_dir", (dir / "half").string()},
                       tiny_flags("3")))
                .code,
            0);
  ASSERT_EQ(run({"train", "--resume", (dir / "half" / "final.bin").string(), "--iterations", "6"}).code, 0);
  TrainState a = load_checkpoint(dir / "full" / "final.bin");
  TrainState b = load_checkpoint(dir / "half" / "final.bin");
  EXPECT_EQ(b.iteration, 6);
  b.config.out_dir = a.config.out_dir;
  EXPECT_EQ(serialize_checkpoint(a), serialize_checkpoint(b));
  EXPECT_EQ(slurp(dir / "full" / "train_log.csv"), slurp(dir / "half" / "train_log.csv"));
  EXPECT_EQ(run({"train", "--resume", (dir / "half" / "final.bin").string(), "--T", "9"}).code, kExitUsage);

  const auto manifest = nlohmann::json::parse(slurp(dir / "full" / "manifest.json"));
  EXPECT_EQ(manifest["command"], "train");
  EXPECT_EQ(manifest["config"]["width"], "8");
  EXPECT_TRUE(manifest.contains("wall_clock_seconds"));
  EXPECT_EQ(manifest["version"], kVersion);
}

TEST(Cli, SampleRecordsPriorAndFinalWithNfe) {
  const auto dir = temp_dir("sample");
  ASSERT_EQ(run(concat({"train", "--out_dir", (dir / "run").string()}, tiny_flags())).code, 0);
  const auto ckpt = (dir / "run" / "final.bin").string();
  const Result r = run({"sample", "--checkpoint", ckpt, "--n", "50", "--seed", "3", "--record", "Ttrunc,0", "--out",
                        (dir / "s").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(dir / "s" / "samples_t0.csv"), 51u);
  EXPECT_EQ(line_count(dir / "s" / "samples_t4.csv"), 51u);
  const auto manifest = nlohmann::json::parse(slurp(dir / "s" / "manifest.json"));
  EXPECT_EQ(manifest["nfe"], 5);
  EXPECT_EQ(manifest["artifacts"].size(), 2u);

  ASSERT_EQ(run({"sample", "--checkpoint", ckpt, "--n", "50", "--seed", "3", "--out", (dir / "s2").string()}).code, 0);
  EXPECT_EQ(slurp(dir / "s" / "samples_t0.csv"), slurp(dir / "s2" / "samples_t0.csv"));

  ASSERT_EQ(run({"sample", "--checkpoint", ckpt, "--n", "0", "--out", (dir / "empty").string()}).code, 0);
  EXPECT_EQ(slurp(dir / "empty" / "samples_t0.csv"), "x,y\n");

  EXPECT_EQ(run({"sample", "--checkpoint", ckpt, "--baseline", "--out", (dir / "x").string()}).code, kExitUsage);
  EXPECT_EQ(run({"sample", "--checkpoint", ckpt, "--record", "7", "--out", (dir / "x").string()}).code, kExitUsage);
  EXPECT_EQ(run({"sample", "--checkpoint", (dir / "missing.bin").string(), "--out", (dir / "x").string()}).code,
            kExitIo);
}

TEST(Cli, SampleBaselineNfeIsT) {
  const auto dir = temp_dir("sample_ddpm");
  ASSERT_EQ(run(concat({"train", "--method", "ddpm", "--out_dir", (dir / "run").string()}, tiny_flags())).code, 0);
  const auto ckpt = (dir / "run" / "final.bin").string();
  ASSERT_EQ(run({"sample", "--checkpoint", ckpt, "--baseline", "--n", "20", "--out", (dir / "s").string()}).code, 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "s" / "manifest.json"))["nfe"], 5);
  EXPECT_EQ(run({"sample", "--checkpoint", ckpt, "--out", (dir / "s2").string()}).code, kExitUsage);
}

TEST(Cli, CorruptCheckpointIsIoError) {
  const auto dir = temp_dir("corrupt");
  {
    std::ofstream f(dir / "bad.bin", std::ios::binary);
    f << "NOTACHECKPOINT";
  }
  const Result r = run({"sample", "--checkpoint", (dir / "bad.bin").string(), "--out", (dir / "s").string()});
  EXPECT_EQ(r.code, kExitIo);
}

TEST(Cli, EvalKlSelfIsZeroAndMatchesLibrary) {
  const auto dir = temp_dir("evalkl");
  ASSERT_EQ(run({"generate-data", "--dataset", "gmm8", "--out", (dir / "d.csv").string()}).code, 0);
  ASSERT_EQ(run({"generate-data", "--dataset", "gmm8", "--seed", "1", "--out", (dir / "s.csv").string()}).code, 0);
  Result r = run({"eval-kl", "--data", (dir / "d.csv").string(), "--samples", (dir / "d.csv").string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(",0,0\n"), std::string::npos) << r.out;

  r = run({"eval-kl", "--data", (dir / "d.csv").string(), "--samples", (dir / "s.csv").string(), "--out",
           (dir / "kl.csv").string(), "--dataset", "gmm8", "--method", "tdpm-gan"});
  ASSERT_EQ(r.code, 0);
  auto flat = [](const Dataset2D& d) {
    std::vector<double> v;
    for (const auto& p : d.points) v.insert(v.end(), {p[0], p[1]});
    return v;
  };
  const double lib = forward_kl(histogram(flat(read_points_csv(dir / "d.csv"))),
                                histogram(flat(read_points_csv(dir / "s.csv"))));
  EXPECT_NE(r.out.find("gmm8,tdpm-gan,0,0,0," + format_double(lib) + ",0"), std::string::npos) << r.out;
  run({"eval-kl", "--data", (dir / "d.csv").string(), "--samples", (dir / "s.csv").string(), "--out",
       (dir / "kl.csv").string()});
  EXPECT_EQ(line_count(dir / "kl.csv"), 3u);
}

TEST(Cli, EvalKlMalformedRowCitesLine) {
  const auto dir = temp_dir("evalkl_bad");
  {
    std::ofstream f(dir / "bad.csv");
    f << "x,y\n0,0\n1,2,3,4\n";
  }
  ASSERT_EQ(run({"generate-data", "--dataset", "gmm8", "--n", "10", "--out", (dir / "d.csv").string()}).code, 0);
  const Result r = run({"eval-kl", "--data", (dir / "d.csv").string(), "--samples", (dir / "bad.csv").string()});
  EXPECT_EQ(r.code, kExitIo);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST(Cli, ReproduceToyWritesTables) {
  const auto dir = temp_dir("repro");
  const Result r = run({"reproduce-toy", "--seeds", "1", "--epochs", "1", "--n", "100", "--threads", "1",
                        "--width", "8", "--data_size", "100", "--batch_size", "50", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(dir / "comparison.csv"), 3u);
  EXPECT_EQ(line_count(dir / "kl.csv"), 5u);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["command"], "reproduce-toy");
  EXPECT_EQ(manifest["config"]["epochs"], "1");
  EXPECT_EQ(run({"reproduce-toy", "--T", "5", "--T_trunc", "1,2", "--out", dir.string()}).code, kExitUsage);
  EXPECT_EQ(run({"reproduce-toy", "--T", "5", "--T_trunc", "5", "--out", dir.string()}).code, kExitUsage);
}
