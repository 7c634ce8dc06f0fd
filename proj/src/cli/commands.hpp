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

#ifndef RADIOBENCH_SRC_CLI_COMMANDS_HPP_
#define RADIOBENCH_SRC_CLI_COMMANDS_HPP_

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>

#include "common.hpp"

namespace radiobench::cli {

struct SimulateArgs {
  std::string config;
};

struct InspectArgs {
  std::string dataset;
  double pitch_m = 1.0;
};

struct TrainArgs {
  std::string variant;
  std::string dataset;
  std::string config;
  std::string resume;
  std::optional<std::size_t> epochs;
};

struct EvalArgs {
  std::string model;
  std::string dataset;
  bool zero_shot = false;
  std::optional<std::size_t> finetune;
  std::optional<std::size_t> head;
  bool chart = false;
  bool calibrate = true;
  std::string split = "all";  // all | train | val | test
  std::size_t k = 10;
  std::optional<std::size_t> epochs;
};

struct LandscapeArgs {
  std::string model;
  std::string dataset;
  std::size_t grid_n = 41;
  std::size_t max_samples = 512;
  double radius = 0.5;
};

struct ExperimentArgs {
  std::string config;
};

struct ReportArgs {
  std::string run_dir;
};

int cmd_simulate(const SimulateArgs& a, const GlobalOptions& g, std::ostream& out);
int cmd_inspect(const InspectArgs& a, std::ostream& out);
int cmd_train(const TrainArgs& a, const GlobalOptions& g, std::ostream& out);
int cmd_eval(const EvalArgs& a, const GlobalOptions& g, std::ostream& out);
int cmd_landscape(const LandscapeArgs& a, const GlobalOptions& g, std::ostream& out);
int cmd_experiment(const ExperimentArgs& a, const GlobalOptions& g, std::ostream& out);
int cmd_report(const ReportArgs& a, const GlobalOptions& g, std::ostream& out,
               std::ostream& err);

}  // namespace radiobench::cli

#endif  // RADIOBENCH_SRC_CLI_COMMANDS_HPP_
