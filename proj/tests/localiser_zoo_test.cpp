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

#include "radiobench/localiser_zoo.hpp"

#include <algorithm>
#include <cmath>
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

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> errors(const Dataset& ds, const std::vector<Vec3>& est) {
  std::vector<double> e;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    e.push_back((est[i] - ds.samples[i].position).norm());
  }
  return e;
}

Dataset small_dataset(std::size_t n, std::uint64_t seed, std::size_t scatterers = 2) {
  UniformSampling u;
  u.height_m = 1.0;
  u.margin_m = 0.5;
  return simulate_dataset(hall_scene(scatterers, 0.5, 1), compact_radio(), u, n, 1e-3,
                          seed);
}

TEST(VariantSpec, ExhaustiveEnumeration) {
  const std::vector<InputKind> inputs = {InputKind::kCsi, InputKind::kPer, InputKind::kTaoa,
                                         InputKind::kReducedCsi, InputKind::kReducedPer};
  const std::vector<OutputKind> outputs = {OutputKind::kPosition, OutputKind::kTaoa,
                                           OutputKind::kLatent, OutputKind::kChart};
  const std::vector<Family> families = {Family::kSupervised, Family::kAutoencoder,
                                        Family::kChannelChart, Family::kClassical};
  std::set<std::string> accepted;
  int n_valid = 0;
  for (auto in : inputs) {
    for (auto out : outputs) {
      for (auto fam : families) {
        VariantSpec s{in, out, fam};
        try {
          s.validate();
          accepted.insert(s.name());
          ++n_valid;
          // Every accepted spec builds.
          EXPECT_NO_THROW(ModelVariant::build(s, compact_radio(), 6, {}, 1));
        } catch (const ConfigError&) {
          EXPECT_THROW(ModelVariant::build(s, compact_radio(), 6, {}, 1), ConfigError);
        }
      }
    }
  }
  // Channel charts accept the raw and reduced input of each kind, which
  // canonicalise to the same variant.
  EXPECT_EQ(n_valid, 12);
  const auto names = VariantSpec::names();
  EXPECT_EQ(accepted, std::set<std::string>(names.begin(), names.end()));
  EXPECT_EQ(names.size(), 10u);
}

TEST(VariantSpec, NamesRoundTrip) {
  for (const auto& s : VariantSpec::all()) {
    EXPECT_EQ(VariantSpec::by_name(s.name()), s);
    EXPECT_EQ(VariantSpec::from_json(s.to_json()), s);
  }
  EXPECT_EQ(VariantSpec::by_name("csi2pos").name(), "CSI2Pos");
  EXPECT_THROW(VariantSpec::by_name("CSI2Chart"), ConfigError);
}

TEST(VariantSpec, SpecExamples) {
  const VariantSpec upper{InputKind::kTaoa, OutputKind::kPosition, Family::kSupervised};
  EXPECT_EQ(upper.name(), "TAoA2Pos");
  const VariantSpec cc{InputKind::kCsi, OutputKind::kChart, Family::kChannelChart};
  EXPECT_EQ(cc.canonical().input, InputKind::kReducedCsi);
  EXPECT_EQ(cc.name(), "CSI-CC");
  const VariantSpec bad{InputKind::kTaoa, OutputKind::kLatent, Family::kAutoencoder};
  EXPECT_THROW(bad.validate(), ConfigError);
  VariantSpec cc3 = cc;
  cc3.chart_dim = 3;
  EXPECT_NO_THROW(cc3.validate());
  cc3.chart_dim = 4;
  EXPECT_THROW(cc3.validate(), ConfigError);
}

TEST(NormalizeChannel, UnitNormUnitExponentIsIdentity) {
  Rng rng = make_rng(1, {});
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexVector h(24);
  for (auto& c : h) c = {n(rng), n(rng)};
  double fro = 0.0;
  for (auto& c : h) fro += std::norm(c);
  for (auto& c : h) c /= std::sqrt(fro);
  const ComplexVector out = normalize_channel(h, {1.0, 4});
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(std::abs(out[i] - h[i]), 0.0, 1e-15);
}

TEST(NormalizeChannel, BetaOneGivesUnitNorm) {
  Rng rng = make_rng(2, {});
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> mag(1e-3, 1e3);
  for (int trial = 0; trial < 100; ++trial) {
    ComplexVector h(16);
    const double s = mag(rng);
    for (auto& c : h) c = {s * n(rng), s * n(rng)};
    double fro = 0.0;
    for (const auto& c : normalize_channel(h, {1.0, 4})) fro += std::norm(c);
    EXPECT_NEAR(std::sqrt(fro), 1.0, 1e-12);
  }
}

TEST(NormalizeChannel, FormulaOracle) {
  Rng rng = make_rng(3, {});
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexVector h(4 * 16);
  for (auto& c : h) c = {n(rng), n(rng)};
  double sq = 0.0;
  for (const auto& c : h) sq += c.real() * c.real() + c.imag() * c.imag();
  const double k = 4.0 / sq;  // B^(beta-1) / ||H||^beta with B = 4, beta = 2
  const ComplexVector out = normalize_channel(h, {2.0, 4});
  for (std::size_t i = 0; i < h.size(); ++i) {
    EXPECT_NEAR(out[i].real(), k * h[i].real(), 1e-12);
    EXPECT_NEAR(out[i].imag(), k * h[i].imag(), 1e-12);
  }
}

TEST(NormalizeChannel, Errors) {
  const ComplexVector zero(8, Complex(0.0, 0.0));
  EXPECT_THROW(normalize_channel(zero, {2.0, 4}), DegenerateInputError);
  const ComplexVector one(8, Complex(1.0, 0.0));
  EXPECT_THROW(normalize_channel(one, {0.0, 4}), ConfigError);
}

ComplexVector los_csi(const SceneConfig& scene, std::size_t m, const Vec3& user,
                      const RadioConfig& radio) {
  std::vector<ComplexVector> cirs;
  for (const auto& p : scene_to_paths(scene, m, user, radio)) {
    cirs.push_back(synthesize_cir(p, radio));
  }
  ComplexVector flat;
  for (const auto& c : cir_to_csi(cirs, radio)) flat.insert(flat.end(), c.begin(), c.end());
  return flat;
}

TEST(ClassicalTaoa, NoiselessLosWithinOneBin) {
  const RadioConfig radio;
  const SceneConfig scene = hall_scene(0, 0.5, 1);
  const double range_bin = radio.sample_period() * kSpeedOfLight;
  const double u_bin = 1.0 / radio.angle_bins();
  for (int ix = 0; ix < 8; ++ix) {
    for (int iy = 0; iy < 6; ++iy) {
      const Vec3 user(1.0 + ix, 1.0 + iy, 1.0);
      for (std::size_t m = 0; m < scene.locators.size(); ++m) {
        const TaoaTriple t = classical_taoa(los_csi(scene, m, user, radio), radio);
        const TaoaTriple g = position_to_taoa(scene.locators[m], user);
        EXPECT_LE(std::abs(t.range - g.range), range_bin);
        EXPECT_LE(std::abs(steering_frequency(t.azimuth, radio) -
                           steering_frequency(g.azimuth, radio)),
                  u_bin);
        EXPECT_EQ(t.elevation, 0.0);
      }
    }
  }
}

TEST(ClassicalTaoa, AllZeroCsiIsAnEstimationError) {
  const RadioConfig radio = compact_radio();
  const ComplexVector zero(radio.n_antennas * radio.n_subcarriers, Complex(0.0, 0.0));
  EXPECT_THROW(classical_taoa(zero, radio), EstimationError);
}

// Two equal-power on-grid paths: delay bins 3 and 10, distinct angle bins.
TEST(ClassicalTaoa, EqualPeaksResolveToLowerDelay) {
  const RadioConfig radio;
  const int n = radio.n_subcarriers;
  const int q_bins = radio.angle_bins();
  struct Path {
    int delay_bin;
    int angle_bin;
  };
  for (const auto& [first, second] : {std::pair<Path, Path>{{10, 2}, {3, 13}},
                                      std::pair<Path, Path>{{3, 2}, {10, 13}}}) {
    ComplexVector csi(static_cast<std::size_t>(radio.n_antennas * n));
    for (int b = 0; b < radio.n_antennas; ++b) {
      for (int s = 0; s < n; ++s) {
        Complex acc(0.0, 0.0);
        for (const Path& p : {first, second}) {
          const double u = angle_bin_frequency(p.angle_bin, q_bins);
          acc += std::polar(1.0, -2.0 * kPi * s * p.delay_bin / n + 2.0 * kPi * u * b);
        }
        csi[static_cast<std::size_t>(b * n + s)] = acc;
      }
    }
    const Path& near = first.delay_bin < second.delay_bin ? first : second;
    const TaoaTriple t = classical_taoa(csi, radio);
    EXPECT_NEAR(t.range, 3.0 * radio.sample_period() * kSpeedOfLight, 1e-6);
    EXPECT_NEAR(steering_frequency(t.azimuth, radio),
                angle_bin_frequency(near.angle_bin, q_bins), 1e-9);
  }
}

TEST(ClassicalLocalise, NoiselessSinglePathBelowFiveCentimetres) {
  UniformSampling u;
  u.height_m = 1.0;
  u.margin_m = 0.5;
  const Dataset ds = simulate_dataset(hall_scene(0, 0.5, 1), RadioConfig{}, u, 100, 0.0, 4);
  const auto est = classical_localise_all(ds);
  EXPECT_LT(median(errors(ds, est)), 0.05);
}

TEST(ClassicalLocalise, Deterministic) {
  const Dataset ds = small_dataset(4, 5);
  for (const auto& s : ds.samples) {
    const auto a = classical_localise(s, ds.scene.locators, ds.radio);
    const auto b = classical_localise(s, ds.scene.locators, ds.radio);
    EXPECT_EQ(a.position, b.position);
  }
  const auto serial = classical_localise_all(ds, {}, par::Exec::kSerial);
  const auto parallel = classical_localise_all(ds, {}, par::Exec::kParallel);
  EXPECT_EQ(serial, parallel);
}

// Paired seeds: the same user positions with and without scatterers.
TEST(ClassicalLocalise, RichScatteringIsWorse) {
  UniformSampling u;
  u.height_m = 1.0;
  u.margin_m = 0.5;
  const RadioConfig radio = compact_radio();
  double clean = 0.0, rich = 0.0;
  int worse = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Dataset a = simulate_dataset(hall_scene(0, 0.8, seed), radio, u, 5, 0.0, seed);
    const Dataset b = simulate_dataset(hall_scene(10, 0.8, seed), radio, u, 5, 0.0, seed);
    const double ea = median(errors(a, classical_localise_all(a)));
    const double eb = median(errors(b, classical_localise_all(b)));
    clean += ea;
    rich += eb;
    worse += eb > ea ? 1 : 0;
  }
  EXPECT_GT(rich, clean);
  EXPECT_GE(worse, 90);
}

TEST(ClassicalLocalise, GridAveragedNotWorseThanMedian) {
  GridSampling g;
  g.pitch_m = 1.0;
  g.height_m = 1.0;
  g.margin_m = 0.5;
  const RadioConfig radio = compact_radio();
  // Repeated noisy captures on each grid point of a multipath-free scene, so
  // the error is dominated by noise rather than by multipath bias.
  const SceneConfig scene = hall_scene(0, 0.5, 2);
  const auto pts = grid_points(scene.bounds, g);
  const Dataset ds = simulate_dataset(scene, radio, g, pts.size() * 4, 0.03, 9);
  const auto est = classical_localise_all(ds);
  const auto grid = grid_averaged_errors(ds, est, 1.0);
  EXPECT_EQ(grid.size(), pts.size());
  EXPECT_LE(median(grid), median(errors(ds, est)));
}

TEST(Standardizer, RoundTripAndConstantColumns) {
  nn::Matrix x(4, 2);
  x << 1, 5, 2, 5, 3, 5, 4, 5;
  const Standardizer s = Standardizer::fit(x);
  EXPECT_DOUBLE_EQ(s.scale(1), 1.0);
  const nn::Matrix z = s.apply(x);
  EXPECT_NEAR(z.col(0).mean(), 0.0, 1e-15);
  EXPECT_LT((s.invert(z) - x).norm(), 1e-12);
  const Standardizer t = Standardizer::from_json(s.to_json());
  EXPECT_EQ(t.mean, s.mean);
  EXPECT_EQ(t.scale, s.scale);
}

TEST(Featurize, WidthsMatch) {
  const Dataset ds = small_dataset(3, 1);
  for (auto k : {InputKind::kCsi, InputKind::kPer, InputKind::kTaoa, InputKind::kReducedCsi,
                 InputKind::kReducedPer}) {
    const nn::Matrix x = featurize(ds, k, {2.0, ds.radio.n_antennas});
    EXPECT_EQ(x.rows(), 3);
    EXPECT_EQ(x.cols(), 6 * feature_width_per_locator(k, ds.radio));
    EXPECT_TRUE(x.allFinite());
  }
}

TEST(ModelVariant, SupervisedVariantsLearn) {
  const Dataset ds = small_dataset(300, 11);
  SplitSpec sp;
  const auto [train, val, test] = split(ds, sp);
  nn::TrainConfig cfg = recommended_train_config(3);
  cfg.epochs = 15;
  for (const char* name : {"CSI2Pos", "PER2TAoA", "TAoA2Pos"}) {
    ModelVariant mv = ModelVariant::build(VariantSpec::by_name(name), ds.radio, 6, {}, 5);
    const auto h = mv.fit(train, &val, cfg);
    EXPECT_LT(h.train.back(), h.train.front()) << name;
    EXPECT_LT(mv.normalized_loss(test), 1.0) << name;
    EXPECT_EQ(mv.predict_positions(test).size(), test.size());
  }
}

TEST(ModelVariant, EmbeddingsHaveDeclaredShapes) {
  const Dataset ds = small_dataset(60, 12);
  nn::TrainConfig cfg = recommended_train_config(1);
  cfg.epochs = 2;
  ModelVariant ae = ModelVariant::build(VariantSpec::by_name("PER-AE"), ds.radio, 6, {}, 1);
  ae.fit(ds, nullptr, cfg);
  EXPECT_EQ(ae.embed(ds).cols(), 6 * 32);
  EXPECT_EQ(ae.embed_locator(ds, 5).cols(), 32);
  EXPECT_THROW(ae.predict_positions(ds), ConfigError);
  ModelVariant cc = ModelVariant::build(VariantSpec::by_name("CSI-CC"), ds.radio, 6, {}, 1);
  cc.fit(ds, nullptr, cfg);
  EXPECT_EQ(cc.embed(ds).cols(), 2);
  EXPECT_GT(cc.normalized_loss(ds), 0.0);
}

TEST(ModelVariant, RejectsMismatchedData) {
  const Dataset ds = small_dataset(10, 13);
  ModelVariant mv = ModelVariant::build(VariantSpec::by_name("CSI2Pos"), RadioConfig{}, 6, {}, 1);
  EXPECT_THROW(mv.fit(ds, nullptr, recommended_train_config()), ConfigError);
  ModelVariant cl = ModelVariant::build(VariantSpec::by_name("Classical"), ds.radio, 6, {}, 1);
  EXPECT_THROW(cl.fit(ds, nullptr, recommended_train_config()), ConfigError);
  EXPECT_THROW(ModelVariant::build(VariantSpec::by_name("Classical"), ds.radio, 1, {}, 1),
               ConfigError);
}

TEST(AttachHead, BackboneIsFrozen) {
  const Dataset ds = small_dataset(120, 14);
  nn::TrainConfig cfg = recommended_train_config(2);
  cfg.epochs = 3;
  ModelVariant ae = ModelVariant::build(VariantSpec::by_name("CSI-AE"), ds.radio, 6, {}, 3);
  ae.fit(ds, nullptr, cfg);
  const std::string before = ae.backbone_hash();
  ae.attach_head(ds, nullptr, cfg, 4);
  EXPECT_EQ(ae.backbone_hash(), before);
  EXPECT_TRUE(ae.has_head());
  EXPECT_EQ(ae.predict_positions(ds).size(), ds.size());
}

// With an identity encoder the head is a plain regressor on the encoder
// input; both must follow the same loss curve.
TEST(AttachHead, IdentityBackboneMatchesPlainRegressor) {
  const Dataset ds = small_dataset(80, 15);
  ModelOptions opts;
  opts.hidden = {};
  VariantSpec spec = VariantSpec::by_name("PER-AE");
  spec.latent_dim = feature_width_per_locator(InputKind::kPer, ds.radio);
  ModelVariant ae = ModelVariant::build(spec, ds.radio, 6, opts, 1);
  nn::TrainConfig cfg = recommended_train_config(6);
  cfg.epochs = 1;
  ae.fit(ds, nullptr, cfg);  // fits the standardisers
  auto groups = ae.layer_groups();
  const auto f = spec.latent_dim;
  groups[0][0]->value = nn::Matrix::Identity(f, f);
  groups[0][1]->value = nn::Matrix::Zero(1, f);
  const nn::Matrix z = ae.embed(ds);

  cfg.epochs = 8;
  const auto head_hist = ae.attach_head(ds, nullptr, cfg, 21);

  const Standardizer zs = Standardizer::fit(z);
  nn::Matrix y(static_cast<Eigen::Index>(ds.size()), 3);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    y.row(static_cast<Eigen::Index>(i)) = ds.samples[i].position.transpose();
  }
  const Standardizer ys = Standardizer::fit(y);
  const nn::Matrix x = zs.apply(z);
  const nn::Matrix t = ys.apply(y);
  nn::Mlp plain({static_cast<int>(x.cols()), 64, 3}, nn::Activation::kRelu,
                nn::Activation::kIdentity, 21);
  const nn::BatchLoss loss = [&](nn::Tape& tape, std::span<const std::size_t> rows) {
    nn::Matrix xb(static_cast<Eigen::Index>(rows.size()), x.cols());
    nn::Matrix tb(static_cast<Eigen::Index>(rows.size()), 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      xb.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
      tb.row(static_cast<Eigen::Index>(i)) = t.row(static_cast<Eigen::Index>(rows[i]));
    }
    return nn::mse_loss(tape, plain.forward(tape, tape.constant(xb)), tape.constant(tb));
  };
  auto params = plain.parameters();
  const auto plain_hist = nn::train(params, loss, ds.size(), cfg);
  ASSERT_EQ(head_hist.train.size(), plain_hist.train.size());
  for (std::size_t e = 0; e < plain_hist.train.size(); ++e) {
    EXPECT_NEAR(head_hist.train[e], plain_hist.train[e], 1e-12);
  }
}

TEST(AttachHead, RejectsNonAutoencoders) {
  const Dataset ds = small_dataset(20, 16);
  ModelVariant mv = ModelVariant::build(VariantSpec::by_name("CSI2Pos"), ds.radio, 6, {}, 1);
  EXPECT_THROW(mv.attach_head(ds, nullptr, recommended_train_config(), 1), ConfigError);
  ModelVariant ae = ModelVariant::build(VariantSpec::by_name("CSI-AE"), ds.radio, 6, {}, 1);
  EXPECT_THROW(ae.attach_head(ds, nullptr, recommended_train_config(), 1), ConfigError);
}

TEST(Checkpoint, RoundTripPreservesPredictions) {
  const Dataset ds = small_dataset(60, 17);
  nn::TrainConfig cfg = recommended_train_config(4);
  cfg.epochs = 3;
  for (const char* name : {"CSI2TAoA", "PER-AE", "CSI-CC", "Classical"}) {
    ModelVariant mv = ModelVariant::build(VariantSpec::by_name(name), ds.radio, 6, {}, 8);
    if (mv.is_learnt()) mv.fit(ds, nullptr, cfg);
    if (mv.spec().family == Family::kAutoencoder) mv.attach_head(ds, nullptr, cfg, 2);
    const auto bytes = nn::encode_checkpoint(mv.to_checkpoint());
    const ModelVariant back = ModelVariant::from_checkpoint(nn::decode_checkpoint(bytes));
    EXPECT_EQ(back.spec(), mv.spec()) << name;
    EXPECT_EQ(back.to_checkpoint().header, mv.to_checkpoint().header) << name;
    if (mv.outputs_position()) {
      EXPECT_EQ(back.predict_positions(ds), mv.predict_positions(ds)) << name;
    } else {
      EXPECT_EQ(back.embed(ds), mv.embed(ds)) << name;
    }
    EXPECT_EQ(nn::encode_checkpoint(back.to_checkpoint()), bytes) << name;
  }
  nn::Checkpoint bad;
  bad.header = {{"something", 1}};
  EXPECT_THROW(ModelVariant::from_checkpoint(bad), FormatError);
}

}  // namespace
}  // namespace radiobench
