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

#ifndef RADIOBENCH_SRC_CLI_COMMON_HPP_
#define RADIOBENCH_SRC_CLI_COMMON_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "radiobench/config.hpp"
#include "radiobench/dataset.hpp"
#include "radiobench/dataset_store.hpp"
#include "radiobench/localiser_zoo.hpp"
#include "radiobench/nn.hpp"

namespace radiobench::cli {

namespace fs = std::filesystem;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out;
};

// Output root: --out, else $RADIOBENCH_OUT, else ./radiobench_out.
fs::path output_root(const GlobalOptions& g);

// One command invocation. The run directory is named after the command and
// the config hash, so equal configs land in the same place.
struct Run {
  fs::path root;
  fs::path dir;
  std::string command;
  std::string hash;
  std::uint64_t seed = 0;
  Json manifest;

  fs::path file(const std::string& name) const { return dir / name; }
  // Appends {command, kind, config_hash, seed, version, run_dir, result}
  // to <root>/ledger.jsonl.
  void record(const std::string& kind, const Json& result) const;
};

// `resolved` is everything that determines the outputs (input files enter
// by content hash); `paths` lists the input paths for the manifest only.
Run open_run(const GlobalOptions& g, const std::string& command, const Json& resolved,
             std::uint64_t seed, const Json& paths);

void write_text(const fs::path& path, const std::string& text);
void write_json(const fs::path& path, const Json& j);
std::string file_sha256(const fs::path& path);

// Shortest text that parses back to the same double.
std::string num(double x);

std::uint64_t resolve_seed(const GlobalOptions& g, const Json& config);

// Train settings: recommended_train_config(seed) overridden by any of
// learning_rate, batch_size, epochs, weight_decay, momentum, max_grad_norm,
// early_stop_patience.
nn::TrainConfig train_config_from_json(const Json& j, std::uint64_t seed);
Json train_config_to_json(const nn::TrainConfig& c);

SplitSpec split_from_json(const Json& j, std::uint64_t seed);
Json split_to_json(const SplitSpec& s);

Dataset load_dataset_file(const std::string& path);

// Checkpoints written by `train` carry a "cli" block (training dataset
// name, split) next to the model header.
struct LoadedModel {
  ModelVariant model;
  Json cli;
  std::string sha256;
};
LoadedModel load_model_file(const std::string& path);

Json vec_json(const Vec3& v);

}  // namespace radiobench::cli

#endif  // RADIOBENCH_SRC_CLI_COMMON_HPP_
