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

#include "commands.hpp"

#include <algorithm>
#include <sstream>
#include <variant>
#include <vector>

#include "radiobench/channel_sim.hpp"
#include "radiobench/errors.hpp"
#include "radiobench/metrics.hpp"
#include "radiobench/shift_harness.hpp"

namespace radiobench::cli {
namespace {

void print(std::ostream& out, const Json& j) { out << j.dump(2) << "\n"; }

Json object_or_empty(const Json& j) { return j.is_object() ? j : Json::object(); }

Json section(const Json& j, const char* key) { return j.contains(key) ? j.at(key) : Json(); }

nn::Matrix positions(const Dataset& ds) {
  nn::Matrix m(static_cast<Eigen::Index>(ds.size()), 3);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = ds.samples[i].position.transpose();
  }
  return m;
}

std::optional<double> median_error(const ModelVariant& model, const Dataset& ds) {
  if (ds.empty() || !model.outputs_position()) return std::nullopt;
  const auto est = model.predict_positions(ds);
  std::vector<Vec3> truth;
  for (const auto& s : ds.samples) truth.push_back(s.position);
  return error_cdf(est, truth).median();
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(); }

// Picks the named part of the split; "all" is the whole dataset.
Dataset select_part(const Dataset& ds, const std::string& part, const SplitSpec& spec) {
  if (part == "all") return ds;
  const auto idx = split_indices(ds, spec);
  if (part == "train") return ds.subset(idx.train);
  if (part == "val") return ds.subset(idx.val);
  if (part == "test") return ds.subset(idx.test);
  throw ConfigError("--split must be all, train, val or test (got '" + part + "')");
}

std::string resolve_relative(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? p : (base / path).string();
}

std::string csv_header_chart(Eigen::Index dims) {
  std::string h = "index,x,y,z";
  for (Eigen::Index d = 0; d < dims; ++d) h += ",c" + std::to_string(d);
  return h + "\n";
}

}  // namespace

int cmd_simulate(const SimulateArgs& a, const GlobalOptions& g, std::ostream& out) {
  const Json j = read_json_file(a.config);
  SimulationConfig c = simulation_from_json(j);
  if (g.seed) c.seed = *g.seed;
  const std::string name = cfg::string_or(j, "name", "", "");
  Json resolved = simulation_to_json(c);
  resolved["name"] = name;

  SceneConfig scene = c.scene;
  if (c.shift) scene = apply_shift(scene, *c.shift);
  Dataset ds = simulate_dataset(scene, c.radio, c.sampling, c.n_samples, c.noise_std, c.seed);
  const std::string hash = config_hash(resolved);
  ds.name = name.empty() ? "sim-" + hash.substr(0, 12) : name;

  const Run run = open_run(g, "simulate", resolved, c.seed, {{"config", a.config}});
  save_dataset(ds, run.file("dataset.rdb"));
  double pitch = 1.0;
  if (const auto* grid = std::get_if<GridSampling>(&c.sampling)) pitch = grid->pitch_m;
  // Files written to disk name outputs relative to the run directory so that
  // trees under different roots compare equal; stdout gets the full path.
  const Json result = {{"dataset", "dataset.rdb"},
                       {"name", ds.name},
                       {"samples", ds.size()},
                       {"grid_pitch_m", pitch},
                       {"grid_cells", grid_positions(ds, pitch).size()},
                       {"sha256", file_sha256(run.file("dataset.rdb"))}};
  write_json(run.file("summary.json"), result);
  run.record("dataset", result);
  Json printed = result;
  printed["dataset"] = run.file("dataset.rdb").string();
  print(out, printed);
  return 0;
}

int cmd_inspect(const InspectArgs& a, std::ostream& out) {
  const Dataset ds = load_dataset_file(a.dataset);
  Json locs = Json::array();
  for (const auto& l : ds.scene.locators) locs.push_back(vec_json(l.position));
  print(out, {{"name", ds.name},
              {"samples", ds.size()},
              {"locators", locs},
              {"radio", radio_to_json(ds.radio)},
              {"bounds", {{"lo", vec_json(ds.scene.bounds.lo)},
                          {"hi", vec_json(ds.scene.bounds.hi)}}},
              {"scatterers", ds.scene.scatterers.size()},
              {"grid_pitch_m", a.pitch_m},
              {"grid_cells", grid_positions(ds, a.pitch_m).size()},
              {"sha256", file_sha256(a.dataset)}});
  return 0;
}

int cmd_train(const TrainArgs& a, const GlobalOptions& g, std::ostream& out) {
  Json config = Json::object();
  if (!a.config.empty()) {
    config = read_json_file(a.config);
    if (!config.is_object()) throw ConfigError("train config must be a JSON object");
    cfg::require_schema(config);
  }
  const std::uint64_t seed = resolve_seed(g, config);
  nn::TrainConfig tc = train_config_from_json(section(config, "train"), seed);
  if (a.epochs) tc.epochs = *a.epochs;
  ModelOptions options =
      config.contains("model") ? ModelOptions::from_json(config.at("model")) : ModelOptions{};
  SplitSpec split = split_from_json(section(config, "split"), seed);

  const Dataset ds = load_dataset_file(a.dataset);
  ModelVariant model;
  Json resume_hash;
  if (!a.resume.empty()) {
    LoadedModel lm = load_model_file(a.resume);
    if (!a.variant.empty() && VariantSpec::by_name(a.variant).name() != lm.model.spec().name()) {
      throw ConfigError("--variant " + a.variant + " does not match the checkpoint's " +
                        lm.model.spec().name());
    }
    // A resumed run keeps the architecture and the split it started with.
    model = std::move(lm.model);
    options = model.options();
    if (lm.cli.is_object() && lm.cli.contains("split")) {
      split = split_from_json(lm.cli.at("split"), seed);
    }
    resume_hash = lm.sha256;
  } else {
    if (a.variant.empty()) throw ConfigError("train needs --variant (or --resume)");
    model = ModelVariant::build(VariantSpec::by_name(a.variant), ds.radio, ds.n_locators(),
                                options, seed);
  }

  const auto idx = split_indices(ds, split);
  const Dataset train = ds.subset(idx.train);
  const Dataset val = ds.subset(idx.val);
  const Dataset test = ds.subset(idx.test);
  const Dataset* val_ptr = val.empty() ? nullptr : &val;
  if (a.resume.empty()) {
    model.fit(train, val_ptr, tc);
  } else {
    model.refit(train, val_ptr, tc);
  }

  const std::string dataset_hash = file_sha256(a.dataset);
  const Json resolved = {{"variant", model.spec().name()},
                         {"dataset_sha256", dataset_hash},
                         {"train", train_config_to_json(tc)},
                         {"model", options.to_json()},
                         {"split", split_to_json(split)},
                         {"resume_sha256", resume_hash}};
  const Run run = open_run(g, "train", resolved, seed,
                           {{"dataset", a.dataset}, {"config", a.config}, {"resume", a.resume}});

  nn::Checkpoint ckpt = model.to_checkpoint();
  ckpt.header["cli"] = {{"train_dataset", ds.name},
                        {"dataset_sha256", dataset_hash},
                        {"split", split_to_json(split)},
                        {"seed", seed}};
  nn::save_checkpoint(ckpt, run.file("model.ckpt"));

  const auto& h = model.history();
  std::ostringstream csv;
  csv << "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < h.train.size(); ++e) {
    csv << e + 1 << ',' << num(h.train[e]) << ',' << (e < h.val.size() ? num(h.val[e]) : "")
        << '\n';
  }
  write_text(run.file("history.csv"), csv.str());

  const Json result = {{"variant", model.spec().name()},
                       {"train_dataset", ds.name},
                       {"model", "model.ckpt"},
                       {"epochs_done", model.epochs_done()},
                       {"train_loss", model.loss(train)},
                       {"val_loss", val.empty() ? Json() : Json(model.loss(val))},
                       {"val_median_m", optional_json(median_error(model, val))},
                       {"test_median_m", optional_json(median_error(model, test))}};
  write_json(run.file("metrics.json"), result);
  run.record("train", result);
  Json printed = result;
  printed["model"] = run.file("model.ckpt").string();
  print(out, printed);
  return 0;
}

int cmd_eval(const EvalArgs& a, const GlobalOptions& g, std::ostream& out) {
  const int modes = static_cast<int>(a.zero_shot) + static_cast<int>(a.finetune.has_value()) +
                    static_cast<int>(a.head.has_value()) + static_cast<int>(a.chart);
  if (modes != 1) {
    throw ConfigError("eval needs exactly one of --zero-shot, --finetune N, --head N, --chart");
  }
  const LoadedModel lm = load_model_file(a.model);
  const ModelVariant& model = lm.model;
  const Json cli = object_or_empty(lm.cli);
  const std::uint64_t seed = g.seed.value_or(cli.value("seed", std::uint64_t{0}));
  const SplitSpec split = split_from_json(section(cli, "split"), seed);
  const Dataset full = load_dataset_file(a.dataset);
  const std::string train_name = cli.value("train_dataset", std::string());

  Json resolved = {{"model_sha256", lm.sha256},
                   {"dataset_sha256", file_sha256(a.dataset)},
                   {"seed", seed}};
  const Json paths = {{"model", a.model}, {"dataset", a.dataset}};
  Json result = {{"variant", model.spec().name()},
                 {"train_dataset", train_name},
                 {"dataset", full.name}};

  if (a.zero_shot) {
    const Dataset target = select_part(full, a.split, split);
    ZeroShotReport rep = zero_shot_eval(model, target, a.calibrate, seed);
    rep.train_name = train_name;
    rep.test_name = a.split == "all" ? full.name : full.name + ":" + a.split;
    resolved["mode"] = "zero_shot";
    resolved["calibrate"] = a.calibrate;
    resolved["split"] = a.split;
    const Run run = open_run(g, "eval", resolved, seed, paths);
    const auto est = model.predict_positions(target);
    std::ostringstream csv;
    csv << "index,x,y,z,est_x,est_y,est_z,raw_error_m\n";
    for (std::size_t i = 0; i < target.size(); ++i) {
      const Vec3& p = target.samples[i].position;
      csv << i << ',' << num(p.x()) << ',' << num(p.y()) << ',' << num(p.z()) << ','
          << num(est[i].x()) << ',' << num(est[i].y()) << ',' << num(est[i].z()) << ','
          << num((est[i] - p).norm()) << '\n';
    }
    write_text(run.file("errors.csv"), csv.str());
    result = rep.to_json();
    result["mode"] = "zero_shot";
    write_json(run.file("eval.json"), result);
    run.record("zero_shot", result);
  } else if (a.finetune) {
    const auto idx = split_indices(full, split);
    const Dataset train = full.subset(idx.train);
    const Dataset test = full.subset(idx.test);
    const std::size_t n = *a.finetune;
    std::vector<std::size_t> budgets = {0};
    for (std::size_t b : kDefaultBudgets) {
      if (b < n) budgets.push_back(b);
    }
    if (n > 0) budgets.push_back(n);
    FinetuneProtocol protocol;
    protocol.label_budget = std::max<std::size_t>(n, 1);
    if (a.epochs) protocol.epochs = *a.epochs;
    protocol.validate();
    if (n > train.size()) {
      throw ConfigError("--finetune " + std::to_string(n) + " exceeds the " +
                        std::to_string(train.size()) + " training samples");
    }
    const auto curve = finetune_curve(model, train, test, budgets, protocol,
                                      recommended_train_config(seed), seed);
    resolved["mode"] = "finetune";
    resolved["budgets"] = budgets;
    resolved["epochs"] = protocol.epochs;
    resolved["learning_rate_scale"] = protocol.learning_rate_scale;
    const Run run = open_run(g, "eval", resolved, seed, paths);
    std::ostringstream csv;
    csv << "budget,median_m\n";
    Json points = Json::array();
    for (const auto& p : curve) {
      csv << p.budget << ',' << num(p.median_m) << '\n';
      points.push_back({{"budget", p.budget}, {"median_m", p.median_m}});
    }
    write_text(run.file("budget_curve.csv"), csv.str());
    result["mode"] = "finetune";
    result["curve"] = points;
    write_json(run.file("eval.json"), result);
    run.record("finetune", result);
  } else if (a.head) {
    nn::TrainConfig cfg = recommended_train_config(seed);
    if (a.epochs) cfg.epochs = *a.epochs;
    const std::vector<Dataset> targets = {full};
    const auto r = backbone_transfer_eval(model, targets, *a.head, cfg, seed);
    resolved["mode"] = "head";
    resolved["head_budget"] = *a.head;
    resolved["train"] = train_config_to_json(cfg);
    const Run run = open_run(g, "eval", resolved, seed, paths);
    std::ostringstream csv;
    csv << "percentile,error_m\n";
    for (int p = 0; p <= 100; ++p) csv << p << ',' << num(r[0].errors.percentile(p)) << '\n';
    write_text(run.file("error_cdf.csv"), csv.str());
    result["mode"] = "head";
    result["head_budget"] = *a.head;
    result["errors"] = r[0].errors.summary();
    write_json(run.file("eval.json"), result);
    run.record("head", result);
  } else {
    if (model.spec().family != Family::kChannelChart) {
      throw ConfigError("--chart needs a channel-chart model (got " + model.spec().name() + ")");
    }
    const Dataset target = select_part(full, a.split, split);
    const nn::Matrix chart = model.embed(target);
    const ChartScore score = chart_score(positions(target), chart, a.k);
    resolved["mode"] = "chart";
    resolved["split"] = a.split;
    resolved["k"] = a.k;
    const Run run = open_run(g, "eval", resolved, seed, paths);
    std::ostringstream csv;
    csv << csv_header_chart(chart.cols());
    for (std::size_t i = 0; i < target.size(); ++i) {
      const Vec3& p = target.samples[i].position;
      csv << i << ',' << num(p.x()) << ',' << num(p.y()) << ',' << num(p.z());
      for (Eigen::Index d = 0; d < chart.cols(); ++d) {
        csv << ',' << num(chart(static_cast<Eigen::Index>(i), d));
      }
      csv << '\n';
    }
    write_text(run.file("chart.csv"), csv.str());
    result["mode"] = "chart";
    result["split"] = a.split;
    result["score"] = score.to_json();
    write_json(run.file("eval.json"), result);
    run.record("chart", result);
  }
  print(out, result);
  return 0;
}

int cmd_landscape(const LandscapeArgs& a, const GlobalOptions& g, std::ostream& out) {
  const LoadedModel lm = load_model_file(a.model);
  const Json cli = object_or_empty(lm.cli);
  const std::uint64_t seed = g.seed.value_or(cli.value("seed", std::uint64_t{0}));
  const Dataset data = load_dataset_file(a.dataset);
  LandscapeOptions opts;
  opts.grid_n = a.grid_n;
  opts.seed = seed;
  const LossLandscape land = loss_landscape(lm.model, data, opts, a.max_samples);
  const double sharp = model_sharpness(lm.model, data, seed, a.radius, 16, a.max_samples);

  const Json resolved = {{"model_sha256", lm.sha256},
                         {"dataset_sha256", file_sha256(a.dataset)},
                         {"grid_n", a.grid_n},
                         {"max_samples", a.max_samples},
                         {"radius", a.radius},
                         {"seed", seed}};
  const Run run = open_run(g, "landscape", resolved, seed,
                           {{"model", a.model}, {"dataset", a.dataset}});
  write_text(run.file("landscape.csv"), land.to_csv());
  const Json result = {
      {"variant", lm.model.spec().name()},
      {"dataset", data.name},
      {"grid_n", a.grid_n},
      {"n_samples", std::min(a.max_samples, data.size())},
      {"centre_loss", land.centre_loss},
      // The model's objective on the data; equals centre_loss whenever the
      // whole dataset fits in max_samples.
      {"eval_loss", data.size() <= a.max_samples ? Json(lm.model.loss(data)) : Json()},
      {"trivial_loss", land.trivial_loss},
      {"sharpness", sharp},
      {"radius", a.radius}};
  write_json(run.file("landscape.json"), result);
  run.record("landscape", result);
  print(out, result);
  return 0;
}

int cmd_experiment(const ExperimentArgs& a, const GlobalOptions& g, std::ostream& out) {
  const Json config = read_json_file(a.config);
  if (!config.is_object()) throw ConfigError("experiment config must be a JSON object");
  cfg::require_schema(config);
  const fs::path base = fs::path(a.config).parent_path();
  const std::uint64_t seed = resolve_seed(g, config);
  const std::string protocol = cfg::string_or(config, "protocol", "", "");

  if (protocol == "wasserstein") {
    const std::string model_path =
        resolve_relative(base, cfg::string_or(config, "model", "", ""));
    const LoadedModel lm = load_model_file(model_path);
    const Json& list = cfg::field(config, "datasets", "");
    if (!list.is_array() || list.size() < 1) {
      throw ConfigError("field 'datasets' must be a non-empty array of paths");
    }
    std::vector<Dataset> datasets;
    Json hashes = Json::array();
    Json paths = Json::array();
    for (const auto& p : list) {
      if (!p.is_string()) throw ConfigError("field 'datasets' must hold paths");
      const std::string path = resolve_relative(base, p.get<std::string>());
      datasets.push_back(load_dataset_file(path));
      hashes.push_back(file_sha256(path));
      paths.push_back(path);
    }
    WassersteinOptions opts;
    opts.per_locator = config.value("per_locator", opts.per_locator);
    opts.cell_pitch_m = cfg::number_or(config, "cell_pitch_m", opts.cell_pitch_m, "");
    opts.n_projections = cfg::uint_or(config, "n_projections", opts.n_projections, "");
    opts.seed = seed;
    const WassersteinMatrix m = wasserstein_matrix(lm.model, datasets, opts);
    const Json resolved = {{"protocol", protocol},
                           {"model_sha256", lm.sha256},
                           {"datasets_sha256", hashes},
                           {"per_locator", opts.per_locator},
                           {"cell_pitch_m", opts.cell_pitch_m},
                           {"n_projections", opts.n_projections},
                           {"seed", seed}};
    const Run run = open_run(g, "experiment", resolved, seed,
                             {{"config", a.config}, {"model", model_path}, {"datasets", paths}});
    write_text(run.file("wasserstein.csv"), m.to_csv());
    Json result = m.to_json();
    result["protocol"] = protocol;
    result["variant"] = lm.model.spec().name();
    write_json(run.file("wasserstein.json"), result);
    run.record("wasserstein", result);
    print(out, result);
    return 0;
  }

  if (protocol == "active_learning") {
    const VariantSpec spec = VariantSpec::by_name(cfg::string_or(config, "variant", "", ""));
    const std::string pool_path = resolve_relative(base, cfg::string_or(config, "pool", "", ""));
    const Dataset all = load_dataset_file(pool_path);
    const double val_frac = cfg::number_or(config, "val_frac", 0.2, "");
    if (!(val_frac > 0.0 && val_frac < 1.0)) {
      throw ConfigError("field 'val_frac' must lie in (0, 1)");
    }
    const auto [val_idx, pool_idx] = calibration_split(all.size(), val_frac, seed);
    const Dataset val = all.subset(val_idx);
    const Dataset pool = all.subset(pool_idx);
    const Json sched_j = section(config, "schedule");
    const std::size_t initial = cfg::uint_or(object_or_empty(sched_j), "initial", 25, "schedule");
    const std::size_t batch = cfg::uint_or(object_or_empty(sched_j), "batch", 25, "schedule");
    const std::size_t final_budget =
        cfg::uint_or(object_or_empty(sched_j), "final", 200, "schedule");
    const auto schedule = budget_schedule(initial, batch, final_budget);
    const nn::TrainConfig tc = train_config_from_json(section(config, "train"), seed);
    const ModelOptions options =
        config.contains("model") ? ModelOptions::from_json(config.at("model")) : ModelOptions{};
    std::vector<std::string> names = {"random", "ensemble_variance"};
    if (config.contains("criteria")) {
      names = config.at("criteria").get<std::vector<std::string>>();
    }
    std::vector<AlCriterion> criteria;
    for (const auto& n : names) {
      AlCriterion c;
      c.kind = al_kind_from_name(n);
      c.pool_batch = batch;
      c.ensemble_size = cfg::uint_or(config, "ensemble_size", c.ensemble_size, "");
      c.cell_pitch_m = cfg::number_or(config, "cell_pitch_m", c.cell_pitch_m, "");
      c.validate();
      criteria.push_back(c);
    }
    std::vector<AlCurve> curves;
    for (const auto& c : criteria) {
      curves.push_back(active_learning_run(spec, options, pool, val, c, schedule, tc, seed));
    }

    Json crit_json = Json::array();
    for (const auto& c : criteria) {
      crit_json.push_back({{"kind", al_kind_name(c.kind)},
                           {"ensemble_size", c.ensemble_size},
                           {"cell_pitch_m", c.cell_pitch_m}});
    }
    const Json resolved = {{"protocol", protocol},
                           {"variant", spec.name()},
                           {"pool_sha256", file_sha256(pool_path)},
                           {"val_frac", val_frac},
                           {"schedule", schedule},
                           {"criteria", crit_json},
                           {"train", train_config_to_json(tc)},
                           {"model", options.to_json()},
                           {"seed", seed}};
    const Run run = open_run(g, "experiment", resolved, seed,
                             {{"config", a.config}, {"pool", pool_path}});
    std::ostringstream csv;
    csv << "criterion,n_labels,val_loss,val_median_m\n";
    Json curves_json = Json::array();
    for (const auto& c : curves) {
      for (const auto& r : c.rounds) {
        csv << al_kind_name(c.criterion.kind) << ',' << r.n_labels << ',' << num(r.val_loss)
            << ',' << num(r.val_median_m) << '\n';
      }
      curves_json.push_back(c.to_json());
    }
    write_text(run.file("al_curves.csv"), csv.str());
    Json result = {{"protocol", protocol},
                   {"variant", spec.name()},
                   {"dataset", all.name},
                   {"curves", curves_json}};
    // Labels each criterion needs to reach the first criterion's final loss.
    if (!curves.empty() && !curves.front().rounds.empty()) {
      const double target = curves.front().rounds.back().val_loss;
      Json reach = Json::object();
      for (const auto& c : curves) {
        const auto n = c.labels_to_reach(target);
        reach[al_kind_name(c.criterion.kind)] = n ? Json(*n) : Json();
      }
      result["target_val_loss"] = target;
      result["labels_to_reach_target"] = reach;
    }
    write_json(run.file("al.json"), result);
    run.record("active_learning", result);
    print(out, result);
    return 0;
  }

  throw ConfigError("field 'protocol' must be wasserstein or active_learning (got '" +
                    protocol + "')");
}

}  // namespace radiobench::cli
