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

#ifndef RADIOBENCH_SHIFT_HARNESS_HPP_
#define RADIOBENCH_SHIFT_HARNESS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "radiobench/dataset.hpp"
#include "radiobench/localiser_zoo.hpp"
#include "radiobench/metrics.hpp"
#include "radiobench/nn.hpp"
#include "radiobench/parallel.hpp"

namespace radiobench {

// --- zero-shot evaluation --------------------------------------------------------

struct Calibration {
  bool applied = false;
  std::size_t n_samples = 0;
  Vec3 position_offset = Vec3::Zero();
  std::vector<TaoaTriple> taoa_offsets;  // per locator (az, el, range)
};

struct ZeroShotReport {
  std::string variant;
  std::string train_name;
  std::string test_name;
  std::size_t n_scored = 0;
  double raw_median_m = 0.0;
  std::optional<double> calibrated_median_m;
  // Median |az|, |el|, |range| errors over all locators (TAoA outputs only).
  std::optional<std::array<double, 3>> raw_median_taoa;
  std::optional<std::array<double, 3>> calibrated_median_taoa;
  Calibration calibration;

  // Calibrated median when calibration ran, raw otherwise.
  double median_m() const { return calibrated_median_m.value_or(raw_median_m); }
  nlohmann::json to_json() const;
};

// Held-out calibration indices: a seeded `fraction` of [0, n) (at least
// one), and the remaining scoring indices; both ascending.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> calibration_split(
    std::size_t n, double fraction, std::uint64_t seed);

// Scores position estimates. With calibrate, the mean bias over the
// calibration indices is subtracted before scoring the rest.
ZeroShotReport score_positions(const Dataset& target, std::span<const Vec3> estimates,
                               bool calibrate, std::uint64_t seed,
                               double calibration_fraction = 0.1);

// Scores per-locator TAoA estimates and the positions the MLE derives from
// them (with the target's locator poses); calibration offsets are
// per-locator TAoA biases.
ZeroShotReport score_taoa(const Dataset& target,
                          std::span<const std::vector<TaoaTriple>> estimates,
                          const MleConfig& mle, bool calibrate, std::uint64_t seed,
                          double calibration_fraction = 0.1,
                          par::Exec exec = par::Exec::kParallel);

// Channel charts are rejected (their output is not a metric position).
ZeroShotReport zero_shot_eval(const ModelVariant& model, const Dataset& target,
                              bool calibrate, std::uint64_t seed,
                              par::Exec exec = par::Exec::kParallel);

// --- fine-tuning -------------------------------------------------------------------

struct FinetuneProtocol {
  std::size_t label_budget = 200;
  std::size_t epochs = 60;
  double learning_rate_scale = 0.3;
  void validate() const;
};

inline const std::vector<std::size_t> kDefaultBudgets = {25, 50, 100, 200, 400, 800};

// The first `budget` entries of a seeded permutation of [0, n), sorted.
// Prefixes are nested across budgets. Throws ConfigError when budget > n.
std::vector<std::size_t> label_subset(std::size_t n, std::size_t budget, std::uint64_t seed);

// Trains every parameter of a copy of `pretrained` on `label_budget`
// labelled samples of `train`. Budget 0 returns the copy untouched.
ModelVariant finetune(const ModelVariant& pretrained, const Dataset& train,
                      const FinetuneProtocol& protocol, const nn::TrainConfig& base,
                      std::uint64_t seed);

// Fresh model of `spec` trained on the same label subset finetune() would
// draw; the from-scratch reference.
ModelVariant train_from_scratch(const VariantSpec& spec, const ModelOptions& options,
                                const Dataset& train, std::size_t label_budget,
                                const nn::TrainConfig& cfg, std::uint64_t seed);

struct BudgetPoint {
  std::size_t budget = 0;
  double median_m = 0.0;
};

// Median test error after fine-tuning at each budget; budget 0 equals the
// zero-shot raw median.
std::vector<BudgetPoint> finetune_curve(const ModelVariant& pretrained, const Dataset& train,
                                        const Dataset& test,
                                        std::span<const std::size_t> budgets,
                                        const FinetuneProtocol& protocol,
                                        const nn::TrainConfig& base, std::uint64_t seed);

// --- active learning -----------------------------------------------------------------

enum class AlKind { kRandom, kEnsembleVariance, kMargin };
std::string al_kind_name(AlKind k);
AlKind al_kind_from_name(const std::string& s);

struct AlCriterion {
  AlKind kind = AlKind::kRandom;
  std::size_t ensemble_size = 4;
  std::size_t pool_batch = 25;
  double cell_pitch_m = 1.0;  // Margin classifier cells
  void validate() const;
};

struct AlRound {
  std::size_t n_labels = 0;
  double val_loss = 0.0;
  double val_median_m = 0.0;
};

struct AlCurve {
  AlCriterion criterion;
  std::vector<AlRound> rounds;
  bool pool_exhausted = false;
  nlohmann::json to_json() const;
  // Smallest label count whose validation loss is <= target; nullopt if
  // never reached.
  std::optional<std::size_t> labels_to_reach(double target_loss) const;
};

// Cumulative label counts: initial, initial + batch, ..., up to final_budget.
std::vector<std::size_t> budget_schedule(std::size_t initial, std::size_t pool_batch,
                                         std::size_t final_budget);

// Acquisition loop over `pool`: train on the labelled set, record the
// validation loss, then move the next batch of pool points chosen by the
// criterion. The model is retrained from scratch (same seed) every round.
AlCurve active_learning_run(const VariantSpec& spec, const ModelOptions& options,
                            const Dataset& pool, const Dataset& val,
                            const AlCriterion& criterion,
                            std::span<const std::size_t> schedule,
                            const nn::TrainConfig& cfg, std::uint64_t seed);

// Acquisition scores (higher = acquire first) for the pool indices given a
// labelled set; exposed for tests.
std::vector<double> ensemble_variance_scores(const VariantSpec& spec,
                                             const ModelOptions& options,
                                             const Dataset& labelled, const Dataset& pool,
                                             std::size_t ensemble_size,
                                             const nn::TrainConfig& cfg, std::uint64_t seed);
std::vector<double> margin_scores(InputKind input, const Dataset& labelled,
                                  const Dataset& pool, double cell_pitch_m,
                                  const nn::TrainConfig& cfg, std::uint64_t seed);

// --- frozen-backbone transfer ----------------------------------------------------------

struct TransferResult {
  std::string dataset;
  ErrorCdf errors;
};

// For each target: seeded train/test split, head trained on head_budget
// labels of the train part, errors on the test part.
std::vector<TransferResult> backbone_transfer_eval(const ModelVariant& backbone,
                                                   std::span<const Dataset> targets,
                                                   std::size_t head_budget,
                                                   const nn::TrainConfig& cfg,
                                                   std::uint64_t seed);

// --- statistics -------------------------------------------------------------------------

// One-sided sign test: P(X >= wins) for X ~ Binomial(n, 1/2).
double sign_test_p(std::size_t wins, std::size_t n);

// --- manifests and the run ledger -----------------------------------------------------

// SHA-256 of the canonical JSON dump (sorted keys, no whitespace).
std::string config_hash(const nlohmann::json& config);

struct LedgerRecord {
  nlohmann::json record;
  std::size_t line = 0;
};

// Appends one JSON object as a line.
void append_ledger(const std::string& path, const nlohmann::json& record);
// Reads all well-formed object lines; malformed lines are reported in
// `warnings` and skipped. A missing file reads as empty.
std::vector<LedgerRecord> read_ledger(const std::string& path,
                                      std::vector<std::string>* warnings);

}  // namespace radiobench

#endif  // RADIOBENCH_SHIFT_HARNESS_HPP_
