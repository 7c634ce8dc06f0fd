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

#include "common.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iterator>

#include "radiobench/binary_io.hpp"
#include "radiobench/cli.hpp"
#include "radiobench/errors.hpp"
#include "radiobench/shift_harness.hpp"

namespace radiobench::cli {

fs::path output_root(const GlobalOptions& g) {
  if (!g.out.empty()) return g.out;
  if (const char* env = std::getenv("RADIOBENCH_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  return "radiobench_out";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string file_sha256(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                        std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

std::string num(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Run open_run(const GlobalOptions& g, const std::string& command, const Json& resolved,
             std::uint64_t seed, const Json& paths) {
  Run run;
  run.root = output_root(g);
  run.command = command;
  run.hash = config_hash(resolved);
  run.seed = seed;
  run.dir = run.root / (command + "-" + run.hash.substr(0, 12));
  std::error_code ec;
  fs::create_directories(run.dir, ec);
  if (ec) throw IoError("cannot create '" + run.dir.string() + "': " + ec.message());
  // The run directory is stored relative to the root so that manifests do
  // not depend on where the root lives.
  run.manifest = {{"command", command},
                  {"config_path", paths},
                  {"config_hash", run.hash},
                  {"seed", seed},
                  {"version", kVersion},
                  {"output_dir", run.dir.filename().string()},
                  {"config", resolved}};
  write_json(run.file("manifest.json"), run.manifest);
  return run;
}

void Run::record(const std::string& kind, const Json& result) const {
  append_ledger((root / "ledger.jsonl").string(),
                {{"command", command},
                 {"kind", kind},
                 {"config_hash", hash},
                 {"seed", seed},
                 {"version", kVersion},
                 {"run_dir", dir.filename().string()},
                 {"result", result}});
}

std::uint64_t resolve_seed(const GlobalOptions& g, const Json& config) {
  if (g.seed) return *g.seed;
  return cfg::uint_or(config, "seed", 0, "");
}

nn::TrainConfig train_config_from_json(const Json& j, std::uint64_t seed) {
  nn::TrainConfig c = recommended_train_config(seed);
  if (j.is_null()) return c;
  if (!j.is_object()) throw ConfigError("field 'train' must be an object");
  const std::string w = "train";
  c.learning_rate = cfg::number_or(j, "learning_rate", c.learning_rate, w);
  c.batch_size = cfg::uint_or(j, "batch_size", c.batch_size, w);
  c.epochs = cfg::uint_or(j, "epochs", c.epochs, w);
  c.weight_decay = cfg::number_or(j, "weight_decay", c.weight_decay, w);
  c.momentum = cfg::number_or(j, "momentum", c.momentum, w);
  c.max_grad_norm = cfg::number_or(j, "max_grad_norm", c.max_grad_norm, w);
  c.early_stop_patience = cfg::uint_or(j, "early_stop_patience", c.early_stop_patience, w);
  try {
    c.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  return c;
}

Json train_config_to_json(const nn::TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
          {"epochs", c.epochs},               {"weight_decay", c.weight_decay},
          {"momentum", c.momentum},           {"max_grad_norm", c.max_grad_norm},
          {"early_stop_patience", c.early_stop_patience}, {"seed", c.seed}};
}

SplitSpec split_from_json(const Json& j, std::uint64_t seed) {
  SplitSpec s;
  s.seed = seed;
  if (j.is_null()) return s;
  if (!j.is_object()) throw ConfigError("field 'split' must be an object");
  const std::string w = "split";
  s.train_frac = cfg::number_or(j, "train_frac", s.train_frac, w);
  s.val_frac = cfg::number_or(j, "val_frac", s.val_frac, w);
  s.test_frac = cfg::number_or(j, "test_frac", s.test_frac, w);
  s.tile_m = cfg::number_or(j, "tile_m", s.tile_m, w);
  s.seed = cfg::uint_or(j, "seed", seed, w);
  const std::string mode = cfg::string_or(j, "mode", "random", w);
  if (mode == "random") {
    s.mode = SplitMode::kRandom;
  } else if (mode == "spatial_block") {
    s.mode = SplitMode::kSpatialBlock;
  } else {
    throw ConfigError("field 'split.mode' must be random or spatial_block (got '" + mode +
                      "')");
  }
  s.validate();
  return s;
}

Json split_to_json(const SplitSpec& s) {
  return {{"train_frac", s.train_frac},
          {"val_frac", s.val_frac},
          {"test_frac", s.test_frac},
          {"mode", s.mode == SplitMode::kRandom ? "random" : "spatial_block"},
          {"tile_m", s.tile_m},
          {"seed", s.seed}};
}

Dataset load_dataset_file(const std::string& path) {
  if (!fs::exists(path)) throw IoError("dataset file '" + path + "' does not exist");
  return load_dataset(path);
}

LoadedModel load_model_file(const std::string& path) {
  if (!fs::exists(path)) throw IoError("model file '" + path + "' does not exist");
  nn::Checkpoint ckpt = nn::load_checkpoint(path);
  LoadedModel m;
  if (ckpt.header.contains("cli")) m.cli = ckpt.header.at("cli");
  m.model = ModelVariant::from_checkpoint(ckpt);
  m.sha256 = file_sha256(path);
  return m;
}

}  // namespace radiobench::cli
