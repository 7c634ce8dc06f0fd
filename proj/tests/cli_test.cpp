// Copyright 2026 The RadioBench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "radiobench/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "radiobench/dataset_store.hpp"

namespace radiobench {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "radiobench");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

// Relative path -> contents, for every file below root.
std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_file(e.path());
  }
  return files;
}

// Manifests record the input paths, which differ between roots; every
// other byte must match.
void expect_same_outputs(const std::map<std::string, std::string>& a,
                         const std::map<std::string, std::string>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [name, bytes] : a) {
    ASSERT_TRUE(b.count(name)) << name;
    if (fs::path(name).filename() == "manifest.json") {
      auto ma = Json::parse(bytes);
      auto mb = Json::parse(b.at(name));
      ma.erase("config_path");
      mb.erase("config_path");
      EXPECT_EQ(ma, mb) << name;
    } else {
      EXPECT_TRUE(b.at(name) == bytes) << name;
    }
  }
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("radiobench_cli_" + std::string(::testing::UnitTest::GetInstance()
                                                ->current_test_info()
                                                ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string sim_config(const std::string& name, std::size_t n, std::uint64_t seed,
                         const std::string& sampling =
                             R"({"mode": "uniform", "margin_m": 0.5})") {
    const std::string p = path(name + ".json");
    write_file(p, R"({"schema": 1, "name": ")" + name +
                      R"(", "scene": {"preset": "hall", "n_scatterers": 2, "seed": 1},
                      "radio": {"preset": "compact"}, "sampling": )" +
                      sampling + R"(, "n_samples": )" + std::to_string(n) +
                      R"(, "noise_std": 0.001, "seed": )" + std::to_string(seed) + "}");
    return p;
  }

  // Simulates into root and returns the dataset path.
  std::string simulate(const std::string& root, const std::string& config) {
    const auto r = run({"--out", root, "simulate", config});
    EXPECT_EQ(r.code, 0) << r.err;
    return r.json()["dataset"].get<std::string>();
  }

  std::string train(const std::string& root, const std::string& variant,
                    const std::string& data, std::size_t epochs) {
    const auto r = run({"--out", root, "train", "--variant", variant, "--data", data,
                        "--epochs", std::to_string(epochs)});
    EXPECT_EQ(r.code, 0) << r.err;
    return r.json()["model"].get<std::string>();
  }

  fs::path dir_;
};

TEST_F(CliTest, SimulateWritesLoadableDataset) {
  const auto r = run({"--out", path("out"), "simulate", sim_config("tiny", 50, 1)});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.json();
  EXPECT_EQ(j["samples"], 50);
  EXPECT_GT(j["grid_cells"].get<int>(), 0);
  const Dataset ds = load_dataset(j["dataset"].get<std::string>());
  EXPECT_EQ(ds.size(), 50u);
  EXPECT_EQ(ds.name, "tiny");
  EXPECT_NO_THROW(ds.validate());
  const auto manifest = Json::parse(read_file(fs::path(j["dataset"].get<std::string>())
                                                  .parent_path() /
                                              "manifest.json"));
  EXPECT_EQ(manifest["command"], "simulate");
  EXPECT_EQ(manifest["config_hash"].get<std::string>().size(), 64u);
  EXPECT_EQ(manifest["version"], cli::kVersion);
}

TEST_F(CliTest, SimulateIsDeterministicAcrossRunsAndThreads) {
  const auto cfg = sim_config("tiny", 60, 2);
  ASSERT_EQ(run({"--out", path("a"), "--threads", "1", "simulate", cfg}).code, 0);
  ASSERT_EQ(run({"--out", path("b"), "--threads", "8", "simulate", cfg}).code, 0);
  const auto a = tree(path("a"));
  expect_same_outputs(a, tree(path("b")));
  // Rerunning into the same root rewrites identical files and appends a
  // second ledger line.
  ASSERT_EQ(run({"--out", path("a"), "simulate", cfg}).code, 0);
  const auto again = tree(path("a"));
  for (const auto& [name, bytes] : a) {
    if (name != "ledger.jsonl") EXPECT_EQ(again.at(name), bytes) << name;
  }
  const auto grid = sim_config("grid", 1, 0, R"({"mode": "grid", "pitch_m": 0.5, "margin_m": 0.5})");
  const auto g = run({"--out", path("a"), "simulate", grid});
  ASSERT_EQ(g.code, 0);
  EXPECT_EQ(g.json()["grid_pitch_m"], 0.5);
}

TEST_F(CliTest, InvalidPathlossExponentIsUsageError) {
  const std::string p = path("bad.json");
  write_file(p, R"({"schema": 1, "scene": {"preset": "hall", "pathloss_exponent": 0},
                    "n_samples": 5})");
  const auto r = run({"--out", path("out"), "simulate", p});
  EXPECT_EQ(r.code, 2);
  const auto err = Json::parse(r.err);
  EXPECT_NE(err["error"]["message"].get<std::string>().find("pathloss_exponent"),
            std::string::npos);
  EXPECT_EQ(err["error"]["exit_code"], 2);
}

TEST_F(CliTest, UsageErrors) {
  const auto data = simulate(path("out"), sim_config("tiny", 40, 3));
  auto r = run({"--out", path("out"), "train", "--variant", "Nope", "--data", data});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("CSI2TAoA"), std::string::npos);
  EXPECT_NE(r.err.find("PER-CC"), std::string::npos);

  r = run({"eval", "--model", path("missing.ckpt"), "--data", data, "--zero-shot"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(Json::parse(r.err)["error"]["kind"], "io");

  r = run({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(Json::parse(r.err)["error"]["kind"], "usage");

  const auto model = train(path("out"), "TAoA2Pos", data, 2);
  r = run({"eval", "--model", model, "--data", data, "--zero-shot", "--chart"});
  EXPECT_EQ(r.code, 2);
  r = run({"eval", "--model", model, "--data", data, "--chart"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(run({"--version"}).code, 0);
}

TEST_F(CliTest, DivergenceIsNumericError) {
  const auto data = simulate(path("out"), sim_config("tiny", 60, 4));
  const std::string cfg = path("train.json");
  write_file(cfg, R"({"schema": 1, "train": {"learning_rate": 1e6, "max_grad_norm": 0,
                      "epochs": 20}})");
  const auto r = run({"--out", path("out"), "train", "--variant", "CSI2Pos", "--data", data,
                      "--config", cfg});
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_EQ(Json::parse(r.err)["error"]["exit_code"], 3);
}

TEST_F(CliTest, Taoa2PosTrainsToDecimetreQuickly) {
  const auto data = simulate(path("out"), sim_config("tiny", 400, 5));
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run({"--out", path("out"), "train", "--variant", "TAoA2Pos", "--data", data});
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(r.json()["test_median_m"].get<double>(), 0.1);
  EXPECT_LT(secs, 60.0);
}

TEST_F(CliTest, ResumeContinuesHistory) {
  const auto data = simulate(path("out"), sim_config("tiny", 200, 6));
  const auto root = path("out");
  const auto first = train(root, "CSI2Pos", data, 3);
  const auto r = run({"--out", root, "train", "--resume", first, "--data", data,
                      "--epochs", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json()["epochs_done"], 6);
  const auto straight = run({"--out", path("other"), "train", "--variant", "CSI2Pos", "--data",
                             data, "--epochs", "6"});
  ASSERT_EQ(straight.code, 0);
  const auto resumed_csv =
      read_file(fs::path(r.json()["model"].get<std::string>()).parent_path() / "history.csv");
  const auto straight_csv = read_file(
      fs::path(straight.json()["model"].get<std::string>()).parent_path() / "history.csv");
  // Checkpoints carry the optimiser velocity and shuffles are keyed by
  // epoch, so 3 + 3 epochs replay the 6-epoch run exactly.
  EXPECT_EQ(resumed_csv, straight_csv);
  EXPECT_EQ(std::count(resumed_csv.begin(), resumed_csv.end(), '\n'), 7);
}

TEST_F(CliTest, ZeroShotOnOwnTestSplitMatchesValidation) {
  const auto data = simulate(path("out"), sim_config("tiny", 1000, 7));
  const auto tr = run({"--out", path("out"), "train", "--variant", "TAoA2Pos", "--data", data});
  ASSERT_EQ(tr.code, 0);
  const double val = tr.json()["val_median_m"].get<double>();
  const auto ev = run({"--out", path("out"), "eval", "--model",
                       tr.json()["model"].get<std::string>(), "--data", data, "--zero-shot",
                       "--split", "test", "--no-calibrate"});
  ASSERT_EQ(ev.code, 0) << ev.err;
  const double test = ev.json()["raw_median_m"].get<double>();
  EXPECT_NEAR(test, val, 0.1 * val);
  EXPECT_FALSE(ev.json().contains("calibrated_median_m"));
}

TEST_F(CliTest, ChartEmitsScoresAndPointCloud) {
  const auto data = simulate(
      path("out"),
      sim_config("circle", 300, 8,
                 R"({"mode": "circle", "centre": [5, 4, 1], "radius_m": 2.5, "turns": 1})"));
  const auto model = train(path("out"), "CSI-CC", data, 3);
  const auto r = run({"--out", path("out"), "eval", "--model", model, "--data", data,
                      "--chart", "--k", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto score = r.json()["score"];
  EXPECT_GE(score["continuity"].get<double>(), 0.0);
  EXPECT_LE(score["trustworthiness"].get<double>(), 1.0);
  EXPECT_EQ(score["k"], 5);
  fs::path csv;
  for (const auto& e : fs::directory_iterator(path("out"))) {
    if (fs::exists(e.path() / "chart.csv")) csv = e.path() / "chart.csv";
  }
  const auto text = read_file(csv);
  EXPECT_EQ(text.substr(0, text.find('\n')), "index,x,y,z,c0,c1");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 301);
}

TEST_F(CliTest, LandscapeGridCentreAndRerun) {
  const auto data = simulate(path("out"), sim_config("tiny", 120, 9));
  const auto model = train(path("out"), "CSI2Pos", data, 3);
  const auto a = run({"--out", path("out"), "landscape", "--model", model, "--data", data,
                      "--grid-n", "5"});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto j = a.json();
  EXPECT_NEAR(j["centre_loss"].get<double>(), j["eval_loss"].get<double>(),
              1e-12 * j["eval_loss"].get<double>());
  fs::path dir;
  for (const auto& e : fs::directory_iterator(path("out"))) {
    if (e.path().filename().string().rfind("landscape-", 0) == 0) dir = e.path();
  }
  const auto csv = read_file(dir / "landscape.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 26);
  // The centre row holds the centre loss.
  std::istringstream lines(csv);
  std::string line;
  int row = 0;
  while (std::getline(lines, line)) {
    if (row++ == 13) EXPECT_EQ(line.substr(0, 4), "0,0,");
  }
  const auto before = read_file(dir / "landscape.csv");
  ASSERT_EQ(run({"--out", path("out"), "landscape", "--model", model, "--data", data,
                 "--grid-n", "5"})
                .code,
            0);
  EXPECT_EQ(read_file(dir / "landscape.csv"), before);
  EXPECT_EQ(run({"landscape", "--model", model, "--data", data, "--grid-n", "4"}).code, 2);
}

TEST_F(CliTest, ReportEmptyDuplicateAndMalformed) {
  auto r = run({"report", path("empty")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json()["runs"], 0);
  EXPECT_EQ(read_file(dir_ / "empty" / "report" / "zero_shot.csv"),
            "config_hash,variant,train_dataset,test_dataset,calibrated,n_scored,"
            "raw_median_m,calibrated_median_m\n");
  EXPECT_EQ(read_file(dir_ / "empty" / "report" / "al_curves.csv"),
            "config_hash,variant,criterion,n_labels,val_loss,val_median_m\n");

  const auto data = simulate(path("out"), sim_config("tiny", 80, 10));
  const auto model = train(path("out"), "TAoA2Pos", data, 2);
  for (int i = 0; i < 2; ++i) {
    ASSERT_EQ(run({"--out", path("out"), "eval", "--model", model, "--data", data,
                   "--zero-shot"})
                  .code,
              0);
  }
  { std::ofstream(path("out/ledger.jsonl"), std::ios::app) << "this is not json\n"; }
  r = run({"report", path("out")});
  ASSERT_EQ(r.code, 0);
  const auto j = r.json();
  EXPECT_EQ(j["duplicates"], 1);
  EXPECT_EQ(j["warnings"], 1);
  EXPECT_EQ(j["tables"]["zero_shot"]["rows"], 1);
  EXPECT_EQ(j["runs"], 3);  // simulate, train, eval
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST_F(CliTest, EnvironmentVariableSetsOutputRoot) {
  const auto cfg = sim_config("tiny", 10, 11);
  ::setenv("RADIOBENCH_OUT", path("env").c_str(), 1);
  const auto r = run({"simulate", cfg});
  ::unsetenv("RADIOBENCH_OUT");
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(fs::exists(path("env/ledger.jsonl")));
}

// Every command, run in fresh roots with 1 and 8 worker threads, writes
// byte-identical trees.
TEST_F(CliTest, EveryCommandIsThreadCountInvariant) {
  const auto cfg = sim_config("tiny", 160, 12);
  const auto circ = sim_config(
      "circle", 120, 13, R"({"mode": "circle", "centre": [5, 4, 1], "radius_m": 2.0})");
  const std::string shifted = path("shifted.json");
  write_file(shifted, R"({"schema": 1, "name": "shifted",
      "scene": {"preset": "hall", "n_scatterers": 2, "seed": 1},
      "radio": {"preset": "compact"}, "sampling": {"mode": "uniform", "margin_m": 0.5},
      "shift": {"kind": "micro_locator", "magnitude": 0.25, "seed": 1},
      "n_samples": 160, "noise_std": 0.001, "seed": 12})");
  std::map<std::string, std::string> first;
  for (const std::string threads : {"1", "8"}) {
    const std::string root = path("t" + threads);
    auto cmd = [&](std::vector<std::string> args) {
      args.insert(args.begin(), {"--out", root, "--threads", threads});
      const auto r = run(args);
      EXPECT_EQ(r.code, 0) << r.err;
      return r;
    };
    const auto data = cmd({"simulate", cfg}).json()["dataset"].get<std::string>();
    const auto shift = cmd({"simulate", shifted}).json()["dataset"].get<std::string>();
    const auto cdata = cmd({"simulate", circ}).json()["dataset"].get<std::string>();
    const auto taoa = cmd({"train", "--variant", "CSI2TAoA", "--data", data, "--epochs", "2"})
                          .json()["model"].get<std::string>();
    const auto ae = cmd({"train", "--variant", "CSI-AE", "--data", data, "--epochs", "2"})
                        .json()["model"].get<std::string>();
    const auto cc = cmd({"train", "--variant", "PER-CC", "--data", cdata, "--epochs", "2"})
                        .json()["model"].get<std::string>();
    cmd({"eval", "--model", taoa, "--data", shift, "--zero-shot"});
    cmd({"eval", "--model", taoa, "--data", shift, "--finetune", "30", "--epochs", "2"});
    cmd({"eval", "--model", ae, "--data", shift, "--head", "30", "--epochs", "2"});
    cmd({"eval", "--model", cc, "--data", cdata, "--chart"});
    cmd({"landscape", "--model", ae, "--data", data, "--grid-n", "3"});
    const std::string wcfg = path("w" + threads + ".json");
    write_file(wcfg, Json{{"schema", 1}, {"protocol", "wasserstein"}, {"model", ae},
                          {"datasets", {data, shift}}, {"n_projections", 16}}
                         .dump());
    cmd({"experiment", wcfg});
    const std::string acfg = path("a" + threads + ".json");
    write_file(acfg, Json{{"schema", 1},
                          {"protocol", "active_learning"},
                          {"variant", "TAoA2Pos"},
                          {"pool", data},
                          {"criteria", {"random", "ensemble_variance", "margin"}},
                          {"ensemble_size", 2},
                          {"schedule", {{"initial", 20}, {"batch", 20}, {"final", 40}}},
                          {"train", {{"epochs", 2}}}}
                         .dump());
    cmd({"experiment", acfg});
    cmd({"report", root});
    auto files = tree(root);
    if (threads == "1") {
      first = files;
    } else {
      expect_same_outputs(first, files);
    }
  }
}

}  // namespace
}  // namespace radiobench
