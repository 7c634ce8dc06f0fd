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
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "radiobench/binary_io.hpp"
#include "radiobench/dataset_store.hpp"
#include "radiobench/errors.hpp"
#include "radiobench/rng.hpp"

namespace radiobench {

namespace {

double median_of(std::vector<double> v) { return ErrorCdf(std::move(v)).median(); }

double wrap(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

std::vector<Vec3> truths(const Dataset& ds, std::span<const std::size_t> idx) {
  std::vector<Vec3> out;
  for (std::size_t i : idx) out.push_back(ds.samples[i].position);
  return out;
}

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace

// --- zero-shot evaluation --------------------------------------------------------

nlohmann::json ZeroShotReport::to_json() const {
  nlohmann::json j = {{"variant", variant},
                      {"train", train_name},
                      {"test", test_name},
                      {"n_scored", n_scored},
                      {"raw_median_m", raw_median_m},
                      {"calibrated", calibration.applied}};
  if (calibrated_median_m) j["calibrated_median_m"] = *calibrated_median_m;
  if (raw_median_taoa) j["raw_median_taoa"] = *raw_median_taoa;
  if (calibrated_median_taoa) j["calibrated_median_taoa"] = *calibrated_median_taoa;
  if (calibration.applied) {
    nlohmann::json c = {{"n_samples", calibration.n_samples},
                        {"position_offset",
                         {calibration.position_offset.x(), calibration.position_offset.y(),
                          calibration.position_offset.z()}}};
    if (!calibration.taoa_offsets.empty()) {
      nlohmann::json t = nlohmann::json::array();
      for (const auto& o : calibration.taoa_offsets) t.push_back({o.azimuth, o.elevation, o.range});
      c["taoa_offsets"] = t;
    }
    j["calibration"] = c;
  }
  return j;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> calibration_split(
    std::size_t n, double fraction, std::uint64_t seed) {
  if (n < 2) throw ConfigError("calibration needs at least two samples");
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("calibration fraction must be in (0, 1)");
  auto n_cal = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  n_cal = std::clamp<std::size_t>(n_cal, 1, n - 1);
  std::vector<std::size_t> idx = iota_n(n);
  Rng rng = make_rng(seed, {0xca1});
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::size_t> cal(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_cal));
  std::vector<std::size_t> rest(idx.begin() + static_cast<std::ptrdiff_t>(n_cal), idx.end());
  std::sort(cal.begin(), cal.end());
  std::sort(rest.begin(), rest.end());
  return {cal, rest};
}

ZeroShotReport score_positions(const Dataset& target, std::span<const Vec3> estimates,
                               bool calibrate, std::uint64_t seed,
                               double calibration_fraction) {
  if (estimates.size() != target.size()) throw ShapeError("one estimate per sample required");
  if (target.empty()) throw DegenerateInputError("empty target dataset");
  ZeroShotReport r;
  r.test_name = target.name;
  std::vector<std::size_t> scored = iota_n(target.size());
  if (calibrate) {
    auto [cal, rest] = calibration_split(target.size(), calibration_fraction, seed);
    Vec3 bias = Vec3::Zero();
    for (std::size_t i : cal) bias += estimates[i] - target.samples[i].position;
    bias /= static_cast<double>(cal.size());
    r.calibration.applied = true;
    r.calibration.n_samples = cal.size();
    r.calibration.position_offset = bias;
    scored = std::move(rest);
  }
  std::vector<double> raw, fixed;
  for (std::size_t i : scored) {
    raw.push_back((estimates[i] - target.samples[i].position).norm());
    if (calibrate) {
      fixed.push_back((estimates[i] - r.calibration.position_offset - target.samples[i].position).norm());
    }
  }
  r.n_scored = scored.size();
  r.raw_median_m = median_of(raw);
  if (calibrate) r.calibrated_median_m = median_of(fixed);
  return r;
}

namespace {

std::array<double, 3> taoa_medians(const Dataset& ds, std::span<const std::size_t> idx,
                                   std::span<const std::vector<TaoaTriple>> est) {
  std::vector<double> az, el, rg;
  for (std::size_t i : idx) {
    for (std::size_t m = 0; m < ds.n_locators(); ++m) {
      const TaoaTriple& t = ds.samples[i].taoa[m];
      az.push_back(std::abs(wrap(est[i][m].azimuth - t.azimuth)));
      el.push_back(std::abs(est[i][m].elevation - t.elevation));
      rg.push_back(std::abs(est[i][m].range - t.range));
    }
  }
  return {median_of(az), median_of(el), median_of(rg)};
}

std::vector<Vec3> mle_positions(const Dataset& ds, std::span<const std::size_t> idx,
                                std::span<const std::vector<TaoaTriple>> est,
                                const MleConfig& mle, par::Exec exec) {
  std::vector<Vec3> out(idx.size());
  par::for_each_task(idx.size(), exec, [&](std::size_t k) {
    out[k] = joint_mle_estimate(est[idx[k]], ds.scene.locators, mle).position;
  });
  return out;
}

}  // namespace

ZeroShotReport score_taoa(const Dataset& target,
                          std::span<const std::vector<TaoaTriple>> estimates,
                          const MleConfig& mle, bool calibrate, std::uint64_t seed,
                          double calibration_fraction, par::Exec exec) {
  if (estimates.size() != target.size()) throw ShapeError("one estimate per sample required");
  if (target.empty()) throw DegenerateInputError("empty target dataset");
  const std::size_t n_loc = target.n_locators();
  for (const auto& e : estimates) {
    if (e.size() != n_loc) throw ShapeError("one TAoA estimate per locator required");
  }
  ZeroShotReport r;
  r.test_name = target.name;
  std::vector<std::size_t> scored = iota_n(target.size());
  std::vector<std::vector<TaoaTriple>> fixed;
  if (calibrate) {
    auto [cal, rest] = calibration_split(target.size(), calibration_fraction, seed);
    std::vector<TaoaTriple> off(n_loc, TaoaTriple{0.0, 0.0, 0.0});
    for (std::size_t i : cal) {
      for (std::size_t m = 0; m < n_loc; ++m) {
        const TaoaTriple& t = target.samples[i].taoa[m];
        off[m].azimuth += wrap(estimates[i][m].azimuth - t.azimuth);
        off[m].elevation += estimates[i][m].elevation - t.elevation;
        off[m].range += estimates[i][m].range - t.range;
      }
    }
    const auto nc = static_cast<double>(cal.size());
    for (auto& o : off) {
      o.azimuth /= nc;
      o.elevation /= nc;
      o.range /= nc;
    }
    fixed.assign(estimates.begin(), estimates.end());
    for (auto& row : fixed) {
      for (std::size_t m = 0; m < n_loc; ++m) {
        row[m].azimuth = wrap(row[m].azimuth - off[m].azimuth);
        row[m].elevation = std::clamp(row[m].elevation - off[m].elevation, -kPi / 2, kPi / 2);
        row[m].range = std::max(0.0, row[m].range - off[m].range);
      }
    }
    r.calibration.applied = true;
    r.calibration.n_samples = cal.size();
    r.calibration.taoa_offsets = off;
    scored = std::move(rest);
  }
  const std::vector<Vec3> truth = truths(target, scored);
  auto position_median = [&](std::span<const std::vector<TaoaTriple>> est) {
    const auto pos = mle_positions(target, scored, est, mle, exec);
    return error_cdf(pos, truth).median();
  };
  r.n_scored = scored.size();
  r.raw_median_m = position_median(estimates);
  r.raw_median_taoa = taoa_medians(target, scored, estimates);
  if (calibrate) {
    r.calibrated_median_m = position_median(fixed);
    r.calibrated_median_taoa = taoa_medians(target, scored, fixed);
  }
  return r;
}

ZeroShotReport zero_shot_eval(const ModelVariant& model, const Dataset& target,
                              bool calibrate, std::uint64_t seed, par::Exec exec) {
  if (model.spec().family == Family::kChannelChart) {
    throw ConfigError("channel charts have no metric position output; score them with "
                      "continuity/trustworthiness");
  }
  if (target.n_locators() != model.n_locators() || !(target.radio == model.radio())) {
    throw ConfigError("target dataset shapes are incompatible with the model's radio "
                      "configuration");
  }
  ZeroShotReport r;
  if (model.spec().output == OutputKind::kTaoa) {
    r = score_taoa(target, model.predict_taoa(target), model.mle_config(), calibrate, seed,
                   0.1, exec);
  } else {
    const auto est = model.predict_positions(target, exec);
    r = score_positions(target, est, calibrate, seed);
  }
  r.variant = model.spec().name();
  return r;
}

// --- fine-tuning -------------------------------------------------------------------

void FinetuneProtocol::validate() const {
  if (epochs < 1) throw ConfigError("finetune epochs must be >= 1");
  if (!(learning_rate_scale > 0.0)) throw ConfigError("learning_rate_scale must be > 0");
}

std::vector<std::size_t> label_subset(std::size_t n, std::size_t budget, std::uint64_t seed) {
  if (budget > n) {
    throw ConfigError("label budget " + std::to_string(budget) + " exceeds the " +
                      std::to_string(n) + " available samples");
  }
  std::vector<std::size_t> idx = iota_n(n);
  Rng rng = make_rng(seed, {0x1abe1});
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(budget);
  std::sort(idx.begin(), idx.end());
  return idx;
}

ModelVariant finetune(const ModelVariant& pretrained, const Dataset& train,
                      const FinetuneProtocol& protocol, const nn::TrainConfig& base,
                      std::uint64_t seed) {
  protocol.validate();
  if (!pretrained.is_learnt()) throw ConfigError("the classical baseline cannot be fine-tuned");
  if (pretrained.spec().family == Family::kChannelChart) {
    throw ConfigError("channel charts have no labelled objective to fine-tune");
  }
  if (pretrained.spec().family == Family::kAutoencoder && !pretrained.has_head()) {
    throw ConfigError("attach a head to the autoencoder before fine-tuning");
  }
  ModelVariant model = pretrained;
  if (protocol.label_budget == 0) return model;
  const auto idx = label_subset(train.size(), protocol.label_budget, seed);
  nn::TrainConfig cfg = base;
  cfg.learning_rate = base.learning_rate * protocol.learning_rate_scale;
  cfg.epochs = protocol.epochs;
  cfg.early_stop_patience = 0;
  cfg.seed = derive_seed(seed, {0xf1});
  cfg.first_epoch = 0;
  model.refit(train.subset(idx), nullptr, cfg);
  return model;
}

ModelVariant train_from_scratch(const VariantSpec& spec, const ModelOptions& options,
                                const Dataset& train, std::size_t label_budget,
                                const nn::TrainConfig& cfg, std::uint64_t seed) {
  if (label_budget == 0) throw ConfigError("from-scratch training needs labels");
  const auto idx = label_subset(train.size(), label_budget, seed);
  const Dataset sub = train.subset(idx);
  ModelVariant model = ModelVariant::build(spec, train.radio, train.n_locators(), options,
                                           derive_seed(seed, {0x5c4}));
  nn::TrainConfig c = cfg;
  c.early_stop_patience = 0;
  c.seed = derive_seed(seed, {0xf1});
  model.fit(sub, nullptr, c);
  if (spec.family == Family::kAutoencoder) {
    // Same architecture as a fine-tuned AE: a head, then joint training,
    // seeing only the budgeted samples.
    model.attach_head(sub, nullptr, c, derive_seed(seed, {0x4ead}));
    model.refit(sub, nullptr, c);
  }
  return model;
}

std::vector<BudgetPoint> finetune_curve(const ModelVariant& pretrained, const Dataset& train,
                                        const Dataset& test,
                                        std::span<const std::size_t> budgets,
                                        const FinetuneProtocol& protocol,
                                        const nn::TrainConfig& base, std::uint64_t seed) {
  std::vector<BudgetPoint> out;
  for (std::size_t b : budgets) {
    if (b > train.size()) {
      throw ConfigError("label budget " + std::to_string(b) + " exceeds the " +
                        std::to_string(train.size()) + " training samples");
    }
  }
  for (std::size_t b : budgets) {
    FinetuneProtocol p = protocol;
    p.label_budget = b;
    const ModelVariant m = finetune(pretrained, train, p, base, seed);
    out.push_back({b, zero_shot_eval(m, test, false, seed).raw_median_m});
  }
  return out;
}

// --- active learning -----------------------------------------------------------------

std::string al_kind_name(AlKind k) {
  switch (k) {
    case AlKind::kRandom: return "random";
    case AlKind::kEnsembleVariance: return "ensemble_variance";
    case AlKind::kMargin: return "margin";
  }
  return "random";
}

AlKind al_kind_from_name(const std::string& s) {
  for (AlKind k : {AlKind::kRandom, AlKind::kEnsembleVariance, AlKind::kMargin}) {
    if (s == al_kind_name(k)) return k;
  }
  throw ConfigError("unknown active-learning criterion '" + s +
                    "'; valid: random, ensemble_variance, margin");
}

void AlCriterion::validate() const {
  if (kind == AlKind::kEnsembleVariance && ensemble_size < 2) {
    throw ConfigError("ensemble_size must be >= 2 for ensemble_variance");
  }
  if (pool_batch < 1) throw ConfigError("pool_batch must be >= 1");
  if (!(cell_pitch_m > 0.0)) throw ConfigError("cell_pitch_m must be > 0");
}

nlohmann::json AlCurve::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rounds) {
    rows.push_back({{"n_labels", r.n_labels}, {"val_loss", r.val_loss},
                    {"val_median_m", r.val_median_m}});
  }
  return {{"criterion", al_kind_name(criterion.kind)},
          {"ensemble_size", criterion.ensemble_size},
          {"pool_batch", criterion.pool_batch},
          {"pool_exhausted", pool_exhausted},
          {"rounds", rows}};
}

std::optional<std::size_t> AlCurve::labels_to_reach(double target_loss) const {
  for (const auto& r : rounds) {
    if (r.val_loss <= target_loss) return r.n_labels;
  }
  return std::nullopt;
}

std::vector<std::size_t> budget_schedule(std::size_t initial, std::size_t pool_batch,
                                         std::size_t final_budget) {
  if (initial < 1 || pool_batch < 1 || final_budget < initial) {
    throw ConfigError("budget schedule needs 1 <= initial <= final and pool_batch >= 1");
  }
  std::vector<std::size_t> out;
  for (std::size_t b = initial; b < final_budget; b += pool_batch) out.push_back(b);
  out.push_back(final_budget);
  return out;
}

namespace {

ModelVariant train_member(const VariantSpec& spec, const ModelOptions& options,
                          const Dataset& labelled, const nn::TrainConfig& cfg,
                          std::uint64_t seed) {
  ModelVariant m = ModelVariant::build(spec, labelled.radio, labelled.n_locators(), options, seed);
  nn::TrainConfig c = cfg;
  c.seed = seed;
  c.early_stop_patience = 0;
  m.fit(labelled, nullptr, c);
  return m;
}

}  // namespace

std::vector<double> ensemble_variance_scores(const VariantSpec& spec,
                                             const ModelOptions& options,
                                             const Dataset& labelled, const Dataset& pool,
                                             std::size_t ensemble_size,
                                             const nn::TrainConfig& cfg, std::uint64_t seed) {
  if (ensemble_size < 2) throw ConfigError("ensemble_size must be >= 2");
  std::vector<std::vector<Vec3>> preds;
  for (std::size_t e = 0; e < ensemble_size; ++e) {
    const ModelVariant m = train_member(spec, options, labelled, cfg, derive_seed(seed, {0xe5, e}));
    preds.push_back(m.predict_positions(pool));
  }
  std::vector<double> scores(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    Vec3 mean = Vec3::Zero();
    for (const auto& p : preds) mean += p[i];
    mean /= static_cast<double>(ensemble_size);
    double var = 0.0;
    for (const auto& p : preds) var += (p[i] - mean).squaredNorm();
    scores[i] = var / static_cast<double>(ensemble_size - 1);
  }
  return scores;
}

std::vector<double> margin_scores(InputKind input, const Dataset& labelled,
                                  const Dataset& pool, double cell_pitch_m,
                                  const nn::TrainConfig& cfg, std::uint64_t seed) {
  using Key = std::array<long long, 3>;
  auto key_of = [&](const Vec3& p) {
    return Key{std::llround(p.x() / cell_pitch_m), std::llround(p.y() / cell_pitch_m),
               std::llround(p.z() / cell_pitch_m)};
  };
  std::map<Key, int> cell_id;
  for (const Vec3& c : grid_positions(labelled, cell_pitch_m)) {
    cell_id.emplace(key_of(c), static_cast<int>(cell_id.size()));
  }
  std::vector<int> labels;
  for (const auto& s : labelled.samples) labels.push_back(cell_id.at(key_of(s.position)));
  const int n_cells = static_cast<int>(cell_id.size());
  if (n_cells < 2) return std::vector<double>(pool.size(), 0.0);

  const ChartNormConfig norm{2.0, labelled.radio.n_antennas};
  const Standardizer st = Standardizer::fit(featurize(labelled, input, norm));
  const nn::Matrix x = st.apply(featurize(labelled, input, norm));
  nn::Mlp clf({static_cast<int>(x.cols()), 64, n_cells}, nn::Activation::kRelu,
              nn::Activation::kIdentity, derive_seed(seed, {0x3a7}));
  const nn::BatchLoss loss = [&](nn::Tape& t, std::span<const std::size_t> rows) {
    nn::Matrix xb(static_cast<Eigen::Index>(rows.size()), x.cols());
    std::vector<int> yb;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      xb.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
      yb.push_back(labels[rows[r]]);
    }
    return t.softmax_cross_entropy(clf.forward(t, t.constant(xb)), yb);
  };
  nn::TrainConfig c = cfg;
  c.seed = derive_seed(seed, {0x3a7});
  c.early_stop_patience = 0;
  auto params = clf.parameters();
  nn::train(params, loss, labelled.size(), c);

  const nn::Matrix logits = clf.forward(st.apply(featurize(pool, input, norm)));
  std::vector<double> scores(pool.size());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const Eigen::RowVectorXd z = logits.row(i).array() - logits.row(i).maxCoeff();
    const Eigen::RowVectorXd p = z.array().exp() / z.array().exp().sum();
    double p1 = -1.0, p2 = -1.0;
    for (Eigen::Index c2 = 0; c2 < p.size(); ++c2) {
      if (p(c2) > p1) {
        p2 = p1;
        p1 = p(c2);
      } else if (p(c2) > p2) {
        p2 = p(c2);
      }
    }
    scores[static_cast<std::size_t>(i)] = -(p1 - p2);  // small margin first
  }
  return scores;
}

AlCurve active_learning_run(const VariantSpec& spec, const ModelOptions& options,
                            const Dataset& pool, const Dataset& val,
                            const AlCriterion& criterion,
                            std::span<const std::size_t> schedule,
                            const nn::TrainConfig& cfg, std::uint64_t seed) {
  criterion.validate();
  if (schedule.empty()) throw ConfigError("empty budget schedule");
  for (std::size_t r = 1; r < schedule.size(); ++r) {
    if (schedule[r] <= schedule[r - 1]) throw ConfigError("budget schedule must increase");
  }
  if (val.empty()) throw ConfigError("active learning needs a validation set");
  const VariantSpec canon = spec.canonical();
  if (canon.family != Family::kSupervised) {
    throw ConfigError("active learning runs on supervised position/TAoA variants");
  }
  AlCurve curve;
  curve.criterion = criterion;
  std::vector<std::size_t> labelled =
      label_subset(pool.size(), std::min(schedule[0], pool.size()), seed);
  std::vector<bool> taken(pool.size(), false);
  for (std::size_t i : labelled) taken[i] = true;

  for (std::size_t r = 0; r < schedule.size(); ++r) {
    const Dataset lab = pool.subset(labelled);
    const ModelVariant model = train_member(canon, options, lab, cfg, derive_seed(seed, {0xa1}));
    AlRound round;
    round.n_labels = labelled.size();
    round.val_loss = model.loss(val);
    round.val_median_m = error_cdf(model.predict_positions(val), truths(val, iota_n(val.size()))).median();
    curve.rounds.push_back(round);
    if (r + 1 == schedule.size()) break;

    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!taken[i]) rest.push_back(i);
    }
    if (rest.empty()) {
      curve.pool_exhausted = true;
      break;
    }
    const std::size_t need = schedule[r + 1] - labelled.size();
    const std::size_t want = std::min(need, rest.size());
    const Dataset candidates = pool.subset(rest);
    std::vector<double> scores;
    const std::uint64_t round_seed = derive_seed(seed, {0xa1, r});
    switch (criterion.kind) {
      case AlKind::kRandom: {
        Rng rng = make_rng(round_seed, {});
        std::uniform_real_distribution<double> u(0.0, 1.0);
        scores.resize(rest.size());
        for (auto& s : scores) s = u(rng);
        break;
      }
      case AlKind::kEnsembleVariance:
        scores = ensemble_variance_scores(canon, options, lab, candidates,
                                          criterion.ensemble_size, cfg, round_seed);
        break;
      case AlKind::kMargin:
        scores = margin_scores(canon.input, lab, candidates, criterion.cell_pitch_m, cfg,
                               round_seed);
        break;
    }
    std::vector<std::size_t> order = iota_n(rest.size());
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    for (std::size_t k = 0; k < want; ++k) {
      const std::size_t i = rest[order[k]];
      taken[i] = true;
      labelled.push_back(i);
    }
    std::sort(labelled.begin(), labelled.end());
    if (want < need) curve.pool_exhausted = true;
  }
  return curve;
}

// --- frozen-backbone transfer ----------------------------------------------------------

std::vector<TransferResult> backbone_transfer_eval(const ModelVariant& backbone,
                                                   std::span<const Dataset> targets,
                                                   std::size_t head_budget,
                                                   const nn::TrainConfig& cfg,
                                                   std::uint64_t seed) {
  if (backbone.spec().family != Family::kAutoencoder) {
    throw ConfigError(backbone.spec().name() + " has no latent output to transfer");
  }
  if (head_budget == 0) throw ConfigError("head_budget must be >= 1");
  std::vector<TransferResult> out;
  for (const Dataset& ds : targets) {
    SplitSpec sp;
    sp.train_frac = 0.8;
    sp.val_frac = 0.1;
    sp.test_frac = 0.1;
    sp.seed = seed;
    const DatasetSplit parts = split(ds, sp);
    const auto idx = label_subset(parts.train.size(), head_budget, seed);
    ModelVariant m = backbone;
    m.attach_head(parts.train.subset(idx), nullptr, cfg, derive_seed(seed, {0x4ead}));
    const auto est = m.predict_positions(parts.test);
    out.push_back({ds.name, error_cdf(est, truths(parts.test, iota_n(parts.test.size())))});
  }
  return out;
}

// --- statistics -------------------------------------------------------------------------

double sign_test_p(std::size_t wins, std::size_t n) {
  if (wins > n) throw DomainError("wins exceed trials");
  double p = 0.0;
  for (std::size_t k = wins; k <= n; ++k) {
    const double log_c = std::lgamma(static_cast<double>(n) + 1) -
                         std::lgamma(static_cast<double>(k) + 1) -
                         std::lgamma(static_cast<double>(n - k) + 1);
    p += std::exp(log_c - static_cast<double>(n) * std::log(2.0));
  }
  return std::min(1.0, p);
}

// --- manifests and the run ledger -----------------------------------------------------

std::string config_hash(const nlohmann::json& config) { return sha256_hex(config.dump()); }

void append_ledger(const std::string& path, const nlohmann::json& record) {
  if (!record.is_object()) throw ConfigError("ledger records must be JSON objects");
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot open ledger '" + path + "' for appending");
  out << record.dump() << '\n';
  if (!out) throw IoError("failed to append to ledger '" + path + "'");
}

std::vector<LedgerRecord> read_ledger(const std::string& path,
                                      std::vector<std::string>* warnings) {
  std::vector<LedgerRecord> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      if (warnings != nullptr) warnings->push_back("ledger line " + std::to_string(n) + " is malformed; skipped");
      continue;
    }
    out.push_back({std::move(j), n});
  }
  return out;
}

}  // namespace radiobench
