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

#include "radiobench/shift_harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "radiobench/channel_sim.hpp"
#include "radiobench/dataset_store.hpp"
#include "radiobench/errors.hpp"
#include "radiobench/rng.hpp"

namespace radiobench {
namespace {

Dataset small_dataset(std::size_t n, std::uint64_t seed) {
  UniformSampling u;
  u.height_m = 1.0;
  u.margin_m = 0.5;
  return simulate_dataset(hall_scene(2, 0.5, 1), compact_radio(), u, n, 1e-3, seed);
}

nn::TrainConfig quick_config(std::uint64_t seed, std::size_t epochs = 15) {
  auto cfg = recommended_train_config(seed);
  cfg.epochs = epochs;
  return cfg;
}

ModelVariant trained(const std::string& name, const Dataset& train, std::uint64_t seed,
                     std::size_t epochs = 15) {
  auto m = ModelVariant::build(VariantSpec::by_name(name), train.radio, train.n_locators(),
                               {}, seed);
  m.fit(train, nullptr, quick_config(seed, epochs));
  return m;
}

TEST(CalibrationSplit, DisjointSortedAndSeeded) {
  auto [cal, rest] = calibration_split(95, 0.1, 3);
  EXPECT_EQ(cal.size(), 10u);  // round(9.5) with at least one
  EXPECT_EQ(cal.size() + rest.size(), 95u);
  EXPECT_TRUE(std::is_sorted(cal.begin(), cal.end()));
  EXPECT_TRUE(std::is_sorted(rest.begin(), rest.end()));
  std::set<std::size_t> all(cal.begin(), cal.end());
  all.insert(rest.begin(), rest.end());
  EXPECT_EQ(all.size(), 95u);
  EXPECT_EQ(calibration_split(95, 0.1, 3).first, cal);
  EXPECT_NE(calibration_split(95, 0.1, 4).first, cal);
  EXPECT_EQ(calibration_split(3, 0.1, 0).first.size(), 1u);
}

TEST(ZeroShot, ConstantPositionBiasRemovedExactly) {
  const auto ds = small_dataset(120, 5);
  std::vector<Vec3> est;
  for (const auto& s : ds.samples) est.push_back(s.position + Vec3(0.5, 0, 0));
  const auto r = score_positions(ds, est, true, 9);
  EXPECT_NEAR(r.raw_median_m, 0.5, 1e-12);
  ASSERT_TRUE(r.calibrated_median_m.has_value());
  EXPECT_LT(*r.calibrated_median_m, 1e-9);
  EXPECT_NEAR(r.calibration.position_offset.x(), 0.5, 1e-12);
  EXPECT_EQ(r.n_scored + r.calibration.n_samples, ds.size());
  EXPECT_TRUE(r.calibration.applied);

  const auto raw = score_positions(ds, est, false, 9);
  EXPECT_FALSE(raw.calibrated_median_m.has_value());
  EXPECT_FALSE(raw.calibration.applied);
}

TEST(ZeroShot, BiasOnTopOfNoiseMatchesUnbiasedError) {
  // Zero-mean noise plus a constant bias: after calibration the error is
  // the unbiased error shifted by the (small) noise mean on the
  // calibration split, which is exactly what the report's offset says.
  const auto ds = small_dataset(200, 6);
  Rng rng = make_rng(1, {});
  std::normal_distribution<double> n(0.0, 0.1);
  std::vector<Vec3> noisy, biased;
  for (const auto& s : ds.samples) {
    noisy.push_back(s.position + Vec3(n(rng), n(rng), 0.0));
    biased.push_back(noisy.back() + Vec3(0.5, 0, 0));
  }
  const auto a = score_positions(ds, noisy, true, 2);
  const auto b = score_positions(ds, biased, true, 2);
  EXPECT_NEAR(*a.calibrated_median_m, *b.calibrated_median_m, 1e-9);
  EXPECT_NEAR((b.calibration.position_offset - a.calibration.position_offset).x(), 0.5,
              1e-12);
}

TEST(ZeroShot, TaoaBiasRemovedPerLocator) {
  const auto ds = small_dataset(100, 7);
  std::vector<std::vector<TaoaTriple>> est;
  for (const auto& s : ds.samples) {
    auto t = s.taoa;
    for (std::size_t m = 0; m < t.size(); ++m) {
      t[m].range += 0.2 + 0.1 * static_cast<double>(m);
      t[m].azimuth += 0.05;
    }
    est.push_back(t);
  }
  const auto mle = MleConfig::defaults(ds.n_locators(), 0.1, 1000.0);
  const auto r = score_taoa(ds, est, mle, true, 3);
  ASSERT_TRUE(r.raw_median_taoa.has_value());
  EXPECT_NEAR((*r.raw_median_taoa)[0], 0.05, 1e-9);
  ASSERT_TRUE(r.calibrated_median_taoa.has_value());
  for (double e : *r.calibrated_median_taoa) EXPECT_LT(e, 1e-9);
  ASSERT_EQ(r.calibration.taoa_offsets.size(), ds.n_locators());
  EXPECT_NEAR(r.calibration.taoa_offsets[3].range, 0.5, 1e-9);
  // Exact labels through the MLE give near-exact positions.
  EXPECT_LT(*r.calibrated_median_m, 0.01);
  EXPECT_GT(r.raw_median_m, *r.calibrated_median_m);
}

TEST(ZeroShot, InDistributionCalibrationIsNearlyNeutral) {
  const auto ds = small_dataset(400, 8);
  const auto idx = split_indices(ds, {0.6, 0.1, 0.3, SplitMode::kRandom, 1, 1.0});
  const auto train = ds.subset(idx.train);
  const auto test = ds.subset(idx.test);
  const auto m = trained("TAoA2Pos", train, 2, 30);
  const auto r = zero_shot_eval(m, test, true, 4);
  ASSERT_TRUE(r.calibrated_median_m.has_value());
  EXPECT_LT(std::abs(*r.calibrated_median_m - r.raw_median_m), 0.25 * r.raw_median_m + 0.02);
  EXPECT_LT(r.calibration.position_offset.norm(), 0.5 * r.raw_median_m + 0.02);
  const auto j = r.to_json();
  EXPECT_TRUE(j.contains("calibration"));
  EXPECT_EQ(j["variant"], "TAoA2Pos");
}

TEST(ZeroShot, RejectsChartsAndIncompatibleRadio) {
  const auto ds = small_dataset(60, 9);
  auto cc = ModelVariant::build(VariantSpec::by_name("CSI-CC"), ds.radio, ds.n_locators(), {},
                                1);
  EXPECT_THROW(zero_shot_eval(cc, ds, true, 0), ConfigError);
  auto m = ModelVariant::build(VariantSpec::by_name("CSI2Pos"), ds.radio, ds.n_locators(), {},
                               1);
  m.fit(ds, nullptr, quick_config(1, 1));
  auto other = ds;
  other.radio.n_antennas = 8;
  for (auto& s : other.samples) {
    s.csi.n_antennas = 8;
    s.csi.values.resize(s.csi.n_locators * 8 * s.csi.n_subcarriers);
  }
  EXPECT_THROW(zero_shot_eval(m, other, true, 0), ConfigError);
}

TEST(Finetune, LabelSubsetsAreNestedAndBounded) {
  const auto a = label_subset(500, 50, 7);
  const auto b = label_subset(500, 200, 7);
  EXPECT_EQ(a.size(), 50u);
  EXPECT_TRUE(std::is_sorted(b.begin(), b.end()));
  for (auto i : a) EXPECT_TRUE(std::binary_search(b.begin(), b.end(), i));
  EXPECT_EQ(label_subset(500, 500, 7).size(), 500u);
  EXPECT_THROW(label_subset(500, 501, 7), ConfigError);
  EXPECT_TRUE(label_subset(10, 0, 7).empty());
}

TEST(Finetune, BudgetZeroEqualsZeroShot) {
  const auto ds = small_dataset(200, 10);
  const auto m = trained("TAoA2Pos", ds, 3);
  const auto test = small_dataset(80, 11);
  FinetuneProtocol p;
  p.label_budget = 0;
  const auto copy = finetune(m, ds, p, quick_config(3), 5);
  EXPECT_EQ(copy.backbone_hash(), m.backbone_hash());
  EXPECT_EQ(copy.epochs_done(), m.epochs_done());
  const std::vector<std::size_t> budgets = {0};
  const auto curve = finetune_curve(m, ds, test, budgets, {}, quick_config(3), 5);
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_EQ(curve[0].median_m, zero_shot_eval(m, test, false, 5).raw_median_m);
}

TEST(Finetune, TrainsAllParametersAndIsDeterministic) {
  const auto ds = small_dataset(200, 12);
  const auto m = trained("CSI2Pos", ds, 4, 5);
  FinetuneProtocol p;
  p.label_budget = 50;
  p.epochs = 3;
  const auto a = finetune(m, ds, p, quick_config(4), 6);
  const auto b = finetune(m, ds, p, quick_config(4), 6);
  EXPECT_NE(a.backbone_hash(), m.backbone_hash());
  EXPECT_EQ(a.backbone_hash(), b.backbone_hash());
  p.label_budget = 201;
  EXPECT_THROW(finetune(m, ds, p, quick_config(4), 6), ConfigError);
  p.label_budget = 50;
  p.learning_rate_scale = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Finetune, AutoencoderNeedsHead) {
  const auto ds = small_dataset(100, 13);
  auto ae = ModelVariant::build(VariantSpec::by_name("CSI-AE"), ds.radio, ds.n_locators(), {},
                                1);
  ae.fit(ds, nullptr, quick_config(1, 1));
  FinetuneProtocol p;
  p.label_budget = 20;
  EXPECT_THROW(finetune(ae, ds, p, quick_config(1), 0), ConfigError);
  const auto scratch = train_from_scratch(VariantSpec::by_name("CSI-AE"), {}, ds, 20,
                                          quick_config(1, 2), 0);
  EXPECT_TRUE(scratch.has_head());
  EXPECT_TRUE(scratch.outputs_position());
}

TEST(ActiveLearning, BudgetSchedule) {
  EXPECT_EQ(budget_schedule(25, 25, 100), (std::vector<std::size_t>{25, 50, 75, 100}));
  EXPECT_EQ(budget_schedule(10, 30, 50), (std::vector<std::size_t>{10, 40, 50}));
  EXPECT_THROW(budget_schedule(0, 25, 100), ConfigError);
  EXPECT_THROW(budget_schedule(50, 25, 25), ConfigError);
}

TEST(ActiveLearning, RandomIsReproducible) {
  const auto pool = small_dataset(120, 14);
  const auto val = small_dataset(40, 15);
  AlCriterion c;
  c.pool_batch = 20;
  const auto sched = budget_schedule(20, 20, 60);
  const auto spec = VariantSpec::by_name("TAoA2Pos");
  const auto a = active_learning_run(spec, {}, pool, val, c, sched, quick_config(1, 5), 3);
  const auto b = active_learning_run(spec, {}, pool, val, c, sched, quick_config(1, 5), 3);
  ASSERT_EQ(a.rounds.size(), 3u);
  for (std::size_t r = 0; r < a.rounds.size(); ++r) {
    EXPECT_EQ(a.rounds[r].n_labels, sched[r]);
    EXPECT_EQ(a.rounds[r].val_loss, b.rounds[r].val_loss);
    EXPECT_EQ(a.rounds[r].val_median_m, b.rounds[r].val_median_m);
  }
  EXPECT_FALSE(a.pool_exhausted);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}

TEST(ActiveLearning, EmptyPoolGivesPartialCurve) {
  const auto pool = small_dataset(50, 16);
  const auto val = small_dataset(30, 17);
  AlCriterion c;
  c.kind = AlKind::kEnsembleVariance;
  c.ensemble_size = 2;
  c.pool_batch = 20;
  const auto sched = budget_schedule(20, 20, 100);
  const auto curve = active_learning_run(VariantSpec::by_name("TAoA2Pos"), {}, pool, val, c,
                                         sched, quick_config(1, 3), 2);
  EXPECT_TRUE(curve.pool_exhausted);
  ASSERT_FALSE(curve.rounds.empty());
  EXPECT_LT(curve.rounds.size(), sched.size());
  EXPECT_EQ(curve.rounds.back().n_labels, 50u);
}

TEST(ActiveLearning, LabelsToReach) {
  AlCurve c;
  c.rounds = {{10, 1.0, 0.0}, {20, 0.5, 0.0}, {30, 0.6, 0.0}, {40, 0.3, 0.0}};
  EXPECT_EQ(c.labels_to_reach(0.55), 20u);
  EXPECT_EQ(c.labels_to_reach(0.3), 40u);
  EXPECT_FALSE(c.labels_to_reach(0.1).has_value());
}

TEST(ActiveLearning, ScoresHaveOnePerPoolSample) {
  const auto labelled = small_dataset(60, 18);
  const auto pool = small_dataset(25, 19);
  const auto ev = ensemble_variance_scores(VariantSpec::by_name("TAoA2Pos"), {}, labelled,
                                           pool, 3, quick_config(1, 3), 4);
  ASSERT_EQ(ev.size(), pool.size());
  for (double s : ev) EXPECT_GE(s, 0.0);
  const auto mg = margin_scores(InputKind::kTaoa, labelled, pool, 1.0, quick_config(1, 3), 4);
  ASSERT_EQ(mg.size(), pool.size());
  for (double s : mg) {
    EXPECT_LE(s, 0.0);
    EXPECT_GE(s, -1.0);
  }
  AlCriterion c;
  c.kind = AlKind::kEnsembleVariance;
  c.ensemble_size = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(al_kind_from_name(al_kind_name(AlKind::kMargin)), AlKind::kMargin);
}

TEST(ActiveLearning, RejectsUnsupervisedVariants) {
  const auto ds = small_dataset(40, 20);
  AlCriterion c;
  const auto sched = budget_schedule(10, 10, 20);
  EXPECT_THROW(active_learning_run(VariantSpec::by_name("CSI-AE"), {}, ds, ds, c, sched,
                                   quick_config(1, 1), 0),
               ConfigError);
}

TEST(Transfer, HeadBudgetZeroIsConfigError) {
  const auto ds = small_dataset(80, 21);
  auto ae = ModelVariant::build(VariantSpec::by_name("CSI-AE"), ds.radio, ds.n_locators(), {},
                                1);
  ae.fit(ds, nullptr, quick_config(1, 1));
  const std::vector<Dataset> targets = {ds};
  EXPECT_THROW(backbone_transfer_eval(ae, targets, 0, quick_config(1), 0), ConfigError);
  const auto r = backbone_transfer_eval(ae, targets, 30, quick_config(1, 3), 0);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_GT(r[0].errors.size(), 0u);
  auto sup = trained("TAoA2Pos", ds, 1, 1);
  EXPECT_THROW(backbone_transfer_eval(sup, targets, 30, quick_config(1), 0), ConfigError);
}

TEST(Statistics, SignTest) {
  EXPECT_NEAR(sign_test_p(10, 10), std::pow(0.5, 10), 1e-15);
  EXPECT_NEAR(sign_test_p(0, 10), 1.0, 1e-12);
  EXPECT_NEAR(sign_test_p(9, 10), 11.0 / 1024.0, 1e-12);
  EXPECT_NEAR(sign_test_p(5, 10), 638.0 / 1024.0, 1e-12);
}

TEST(Ledger, HashIsKeyOrderIndependent) {
  const auto a = nlohmann::json::parse(R"({"b":1,"a":[1,2],"c":{"y":2,"x":1}})");
  const auto b = nlohmann::json::parse(R"({"c":{"x":1,"y":2},"a":[1,2],"b":1})");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 64u);
  EXPECT_NE(config_hash(a), config_hash(nlohmann::json::parse(R"({"b":2})")));
  // sha256("{}")
  EXPECT_EQ(config_hash(nlohmann::json::object()),
            "44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a");
}

TEST(Ledger, AppendReadAndSkipMalformed) {
  const auto dir = std::filesystem::temp_directory_path() / "radiobench_ledger_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "ledger.jsonl").string();
  std::filesystem::remove(path);
  std::vector<std::string> warnings;
  EXPECT_TRUE(read_ledger(path, &warnings).empty());
  append_ledger(path, {{"run", 1}});
  { std::ofstream(path, std::ios::app) << "{not json\n[1,2]\n"; }
  append_ledger(path, {{"run", 2}});
  const auto recs = read_ledger(path, &warnings);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].record["run"], 1);
  EXPECT_EQ(recs[1].record["run"], 2);
  EXPECT_EQ(recs[1].line, 4u);
  EXPECT_EQ(warnings.size(), 2u);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace radiobench
