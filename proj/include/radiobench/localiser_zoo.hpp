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

#ifndef RADIOBENCH_LOCALISER_ZOO_HPP_
#define RADIOBENCH_LOCALISER_ZOO_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "radiobench/channel_sim.hpp"
#include "radiobench/dataset.hpp"
#include "radiobench/geometry.hpp"
#include "radiobench/nn.hpp"

namespace radiobench {

enum class InputKind { kCsi, kPer, kTaoa, kReducedCsi, kReducedPer };
enum class OutputKind { kPosition, kTaoa, kLatent, kChart };
enum class Family { kSupervised, kAutoencoder, kChannelChart, kClassical };

struct VariantSpec {
  InputKind input = InputKind::kCsi;
  OutputKind output = OutputKind::kPosition;
  Family family = Family::kSupervised;
  int latent_dim = 32;
  int chart_dim = 2;

  // Throws ConfigError naming the violated constraint. Channel charts
  // accept CSI/PER and their reduced forms; the spec is canonicalised to
  // the reduced input.
  void validate() const;
  VariantSpec canonical() const;
  std::string name() const;
  nlohmann::json to_json() const;
  static VariantSpec from_json(const nlohmann::json& j);
  // Accepts the names returned by name(), case-insensitively.
  static VariantSpec by_name(const std::string& name);
  // The ten constructible configurations.
  static std::vector<VariantSpec> all();
  static std::vector<std::string> names();

  bool operator==(const VariantSpec&) const = default;
};

struct ChartNormConfig {
  double pathloss_exponent = 2.0;
  int n_antennas = 4;
  void validate() const;
};

// B^(beta-1) * H / |H|_F^beta for one locator's CSI.
ComplexVector normalize_channel(std::span<const Complex> csi,
                                const ChartNormConfig& cfg);

// Peak of the periodogram refined by three-point quadratic interpolation
// on each axis (circular on the angle axis). Ties break to the lowest delay
// bin, then the lowest angle bin. Elevation is always 0 (linear array).
TaoaTriple classical_taoa(std::span<const Complex> csi, const RadioConfig& radio);

struct ClassicalConfig {
  double range_sigma_m = 1.0;
  double kappa = 1000.0;
};
MleConfig classical_mle_config(std::size_t n_locators, const ClassicalConfig& cfg);

PositionEstimate classical_localise(const Sample& sample,
                                    std::span<const LocatorPose> poses,
                                    const RadioConfig& radio,
                                    const ClassicalConfig& cfg = {});
std::vector<Vec3> classical_localise_all(const Dataset& ds,
                                         const ClassicalConfig& cfg = {},
                                         par::Exec exec = par::Exec::kParallel);
// Estimates averaged over samples sharing a grid cell; one error per cell,
// measured against the cell's mean true position.
std::vector<double> grid_averaged_errors(const Dataset& ds,
                                         std::span<const Vec3> estimates,
                                         double pitch_m);

// Per-column affine standardisation fitted on training features.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const nn::Matrix& x);
  nn::Matrix apply(const nn::Matrix& x) const;
  nn::Matrix invert(const nn::Matrix& z) const;
  bool fitted() const { return mean.size() > 0; }
  nlohmann::json to_json() const;
  static Standardizer from_json(const nlohmann::json& j);
};

// Raw (unstandardised) feature rows, one per sample, locators concatenated.
// CSI: common-phase-removed real/imag pairs; PER: log1p periodogram;
// TAoA: (az, el, range) labels; reduced forms: per-antenna (CSI) or
// per-angle-bin (PER) averages of the normalised channel.
nn::Matrix featurize(const Dataset& ds, InputKind input, const ChartNormConfig& norm);
int feature_width_per_locator(InputKind input, const RadioConfig& radio);

struct ModelOptions {
  std::vector<int> hidden = {64, 64};
  std::vector<int> head_hidden = {64};
  double chart_beta = 2.0;
  bool locator_onehot = true;  // per-locator networks see the locator id
  double triplet_margin = 1.0;
  std::size_t positive_window = 2;  // time steps
  std::size_t negative_gap = 50;    // minimum time-step gap for negatives

  nlohmann::json to_json() const;
  static ModelOptions from_json(const nlohmann::json& j);
};

// One trained (or trainable) localiser of the zoo.
// Training settings the zoo's networks are tuned for: plain momentum SGD at
// the nn defaults diverges on unstandardised-scale gradients early on.
nn::TrainConfig recommended_train_config(std::uint64_t seed = 0);

class ModelVariant {
 public:
  ModelVariant() = default;
  static ModelVariant build(const VariantSpec& spec, const RadioConfig& radio,
                            std::size_t n_locators, const ModelOptions& options,
                            std::uint64_t seed);

  const VariantSpec& spec() const { return spec_; }
  const ModelOptions& options() const { return options_; }
  const RadioConfig& radio() const { return radio_; }
  std::size_t n_locators() const { return n_locators_; }
  bool has_head() const { return head_.has_value(); }
  bool is_learnt() const { return spec_.family != Family::kClassical; }
  // True when predict_positions is available.
  bool outputs_position() const;

  // Fits feature/target standardisers on the first call, then trains all
  // trainable networks. val (optional) drives early stopping.
  nn::LossHistory fit(const Dataset& train, const Dataset* val, const nn::TrainConfig& cfg);
  // Trains every parameter of a model that already has standardisers, e.g.
  // for fine-tuning; standardisers are kept.
  nn::LossHistory refit(const Dataset& train, const Dataset* val, const nn::TrainConfig& cfg);

  // Position estimates. TAoA outputs go through joint_mle_estimate with the
  // dataset's locator poses; AE models need an attached head.
  std::vector<Vec3> predict_positions(const Dataset& ds,
                                      par::Exec exec = par::Exec::kParallel) const;
  // Per-sample, per-locator TAoA predictions (TAoA output only).
  std::vector<std::vector<TaoaTriple>> predict_taoa(const Dataset& ds) const;
  // AE: latents (n x L*M'); CC: chart (n x D).
  nn::Matrix embed(const Dataset& ds) const;
  // AE only: latents of one locator (n x M').
  nn::Matrix embed_locator(const Dataset& ds, std::size_t locator) const;

  // Training objective on a dataset, in standardised units.
  double loss(const Dataset& ds) const;
  // Objective divided by that of the best constant predictor on the same
  // data (1 = no better than predicting the mean).
  double normalized_loss(const Dataset& ds) const;
  // The denominator of normalized_loss.
  double trivial_loss(const Dataset& ds) const;

  // Trainable parameters grouped by dense layer (weight, bias), in the
  // order used by checkpoints. With a head attached only the encoder and
  // head are listed.
  std::vector<std::vector<nn::Parameter*>> layer_groups();
  std::vector<nn::Parameter*> parameters();
  std::vector<const nn::Parameter*> parameters() const;
  std::string backbone_hash() const;

  // Trains a fresh head (options.head_hidden, ReLU) on the frozen encoder's
  // latents to predict position. Throws if the backbone changes.
  nn::LossHistory attach_head(const Dataset& labelled, const Dataset* val,
                              const nn::TrainConfig& cfg, std::uint64_t seed);

  nn::Checkpoint to_checkpoint() const;
  static ModelVariant from_checkpoint(const nn::Checkpoint& ckpt);

  // Loss history accumulated by fit/refit (for resumable training).
  const nn::LossHistory& history() const { return history_; }
  std::size_t epochs_done() const { return history_.train.size(); }
  ClassicalConfig& classical_config() { return classical_; }
  // MLE settings used to turn TAoA outputs into positions.
  MleConfig mle_config() const;

 private:
  struct Prepared;
  Prepared prepare(const Dataset& ds) const;
  nn::Var forward_output(nn::Tape& tape, nn::Var x) const;
  nn::Matrix forward_output(const nn::Matrix& x) const;
  nn::Var objective(nn::Tape& tape, const Prepared& data,
                    std::span<const std::size_t> rows, std::uint64_t draw) const;
  nn::LossHistory train_networks(const Dataset& train, const Dataset* val,
                                 const nn::TrainConfig& cfg);
  void fit_mle_noise(const Dataset& ds);
  void check_compatible(const Dataset& ds) const;

  VariantSpec spec_;
  ModelOptions options_;
  RadioConfig radio_;
  std::size_t n_locators_ = 0;
  std::uint64_t seed_ = 0;
  Standardizer in_std_;
  Standardizer out_std_;
  // Supervised/CC: net_. AE: net_ is the encoder, decoder_ the decoder.
  mutable nn::Mlp net_;
  mutable nn::Mlp decoder_;
  mutable std::optional<nn::Mlp> head_;
  Standardizer head_std_;
  double mle_range_sigma_ = 0.5;
  double mle_kappa_ = 100.0;
  ClassicalConfig classical_;
  nn::LossHistory history_;
  mutable std::uint64_t draws_ = 0;
};

}  // namespace radiobench

#endif  // RADIOBENCH_LOCALISER_ZOO_HPP_
