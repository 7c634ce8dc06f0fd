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

#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "radiobench/cli.hpp"
#include "radiobench/errors.hpp"
#include "radiobench/parallel.hpp"

namespace radiobench::cli {
namespace {

void report_error(std::ostream& err, const std::string& kind, const std::string& message,
                  int code) {
  err << Json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump()
      << "\n";
}

}  // namespace

int exit_code_for(const std::exception& e) {
  const auto* re = dynamic_cast<const Error*>(&e);
  if (re == nullptr) return kExitInternal;
  switch (re->kind()) {
    case ErrorKind::kConfig:
    case ErrorKind::kShape:
    case ErrorKind::kFormat:
    case ErrorKind::kCorruption:
    case ErrorKind::kIo:
      return kExitUsage;
    case ErrorKind::kNumeric:
    case ErrorKind::kOptimisation:
    case ErrorKind::kEstimation:
    case ErrorKind::kDomain:
    case ErrorKind::kDegenerateGeometry:
    case ErrorKind::kDegenerateInput:
      return kExitNumeric;
  }
  return kExitInternal;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"radiobench: RF localisation benchmark toolkit", "radiobench"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Seed overriding the config's seed");
  app.add_option("--threads", g.threads, "Worker threads (0 = OpenMP default)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "Output root (default $RADIOBENCH_OUT or ./radiobench_out)");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate a dataset from a JSON config");
  c_sim->add_option("config", sim.config, "Simulation config (JSON)")->required();

  InspectArgs ins;
  auto* c_ins = app.add_subcommand("inspect", "Summarise an .rdb dataset");
  c_ins->add_option("dataset", ins.dataset, ".rdb file")->required();
  c_ins->add_option("--pitch", ins.pitch_m, "Grid pitch for the cell count (m)")
      ->check(CLI::PositiveNumber);

  TrainArgs tr;
  std::size_t epochs = 0;
  auto* c_tr = app.add_subcommand("train", "Train one localiser variant");
  c_tr->add_option("--variant", tr.variant, "Variant name, e.g. CSI2Pos");
  c_tr->add_option("--data", tr.dataset, ".rdb dataset")->required();
  c_tr->add_option("--config", tr.config, "Training config (JSON)");
  c_tr->add_option("--resume", tr.resume, "Checkpoint to continue training from");
  auto* tr_epochs = c_tr->add_option("--epochs", epochs, "Epochs to run (overrides config)");

  EvalArgs ev;
  std::size_t finetune = 0, head = 0, ev_epochs = 0;
  auto* c_ev = app.add_subcommand("eval", "Evaluate a trained model");
  c_ev->add_option("--model", ev.model, "Checkpoint")->required();
  c_ev->add_option("--data", ev.dataset, ".rdb dataset")->required();
  c_ev->add_flag("--zero-shot", ev.zero_shot, "Zero-shot evaluation");
  auto* ev_ft = c_ev->add_option("--finetune", finetune, "Fine-tune on N labels");
  auto* ev_head = c_ev->add_option("--head", head, "Frozen backbone plus head on N labels");
  c_ev->add_flag("--chart", ev.chart, "Chart quality (channel charts)");
  c_ev->add_flag("!--no-calibrate", ev.calibrate, "Skip the mean-bias calibration");
  c_ev->add_option("--split", ev.split, "all, train, val or test");
  c_ev->add_option("--k", ev.k, "Neighbourhood size for --chart")->check(CLI::PositiveNumber);
  auto* ev_ep = c_ev->add_option("--epochs", ev_epochs, "Epochs for --finetune/--head");

  LandscapeArgs la;
  auto* c_la = app.add_subcommand("landscape", "Loss landscape around a trained model");
  c_la->add_option("--model", la.model, "Checkpoint")->required();
  c_la->add_option("--data", la.dataset, ".rdb dataset")->required();
  c_la->add_option("--grid-n", la.grid_n, "Grid points per axis (odd)");
  c_la->add_option("--max-samples", la.max_samples, "Samples used for the loss")
      ->check(CLI::PositiveNumber);
  c_la->add_option("--radius", la.radius, "Sharpness radius")->check(CLI::PositiveNumber);

  ExperimentArgs ex;
  auto* c_ex = app.add_subcommand("experiment", "Multi-dataset protocols (wasserstein, active_learning)");
  c_ex->add_option("config", ex.config, "Experiment config (JSON)")->required();

  ReportArgs rep;
  auto* c_rep = app.add_subcommand("report", "Aggregate the run ledger into tables");
  c_rep->add_option("run_dir", rep.run_dir, "Output root holding ledger.jsonl");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what(), kExitUsage);
    return kExitUsage;
  }

  if (*seed_opt) g.seed = seed;
  if (*tr_epochs) tr.epochs = epochs;
  if (*ev_ft) ev.finetune = finetune;
  if (*ev_head) ev.head = head;
  if (*ev_ep) ev.epochs = ev_epochs;
  par::set_num_threads(g.threads);

  try {
    if (c_sim->parsed()) return cmd_simulate(sim, g, out);
    if (c_ins->parsed()) return cmd_inspect(ins, out);
    if (c_tr->parsed()) return cmd_train(tr, g, out);
    if (c_ev->parsed()) return cmd_eval(ev, g, out);
    if (c_la->parsed()) return cmd_landscape(la, g, out);
    if (c_ex->parsed()) return cmd_experiment(ex, g, out);
    if (c_rep->parsed()) return cmd_report(rep, g, out, err);
  } catch (const Error& e) {
    const int code = exit_code_for(e);
    report_error(err, std::string(to_string(e.kind())), e.what(), code);
    return code;
  } catch (const Json::exception& e) {
    // Type mismatches while reading a config are configuration errors.
    report_error(err, "config", e.what(), kExitUsage);
    return kExitUsage;
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what(), kExitInternal);
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace radiobench::cli
