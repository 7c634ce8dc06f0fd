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
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "radiobench/errors.hpp"
#include "radiobench/rng.hpp"

namespace radiobench {

using nn::Matrix;
using nn::Tape;
using nn::Var;

// --- variant specs -----------------------------------------------------------

namespace {

const char* input_name(InputKind k) {
  switch (k) {
    case InputKind::kCsi: return "csi";
    case InputKind::kPer: return "per";
    case InputKind::kTaoa: return "taoa";
    case InputKind::kReducedCsi: return "reduced_csi";
    case InputKind::kReducedPer: return "reduced_per";
  }
  return "csi";
}

const char* output_name(OutputKind k) {
  switch (k) {
    case OutputKind::kPosition: return "position";
    case OutputKind::kTaoa: return "taoa";
    case OutputKind::kLatent: return "latent";
    case OutputKind::kChart: return "chart";
  }
  return "position";
}

const char* family_name(Family f) {
  switch (f) {
    case Family::kSupervised: return "supervised";
    case Family::kAutoencoder: return "autoencoder";
    case Family::kChannelChart: return "channel_chart";
    case Family::kClassical: return "classical";
  }
  return "supervised";
}

template <typename E, std::size_t N>
E enum_from(const std::string& s, const std::array<E, N>& values,
            const char* (*name)(E), const char* what) {
  for (E v : values) {
    if (s == name(v)) return v;
  }
  throw ConfigError(std::string("unknown ") + what + " '" + s + "'");
}

bool is_channel(InputKind k) { return k == InputKind::kCsi || k == InputKind::kPer; }
bool is_csi_like(InputKind k) { return k == InputKind::kCsi || k == InputKind::kReducedCsi; }

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

void VariantSpec::validate() const {
  switch (family) {
    case Family::kSupervised:
      if (input == InputKind::kTaoa) {
        if (output != OutputKind::kPosition) {
          throw ConfigError("TAoA input is only valid for the TAoA2Pos upper bound "
                            "(supervised, position output)");
        }
        return;
      }
      if (!is_channel(input)) {
        throw ConfigError("supervised variants take CSI or PER input");
      }
      if (output != OutputKind::kPosition && output != OutputKind::kTaoa) {
        throw ConfigError("supervised variants output position or TAoA");
      }
      return;
    case Family::kAutoencoder:
      if (!is_channel(input)) throw ConfigError("autoencoders take CSI or PER input");
      if (output != OutputKind::kLatent) {
        throw ConfigError("autoencoders output a latent of dimension M'");
      }
      if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
      return;
    case Family::kChannelChart:
      if (input == InputKind::kTaoa) {
        throw ConfigError("channel charts take (reduced) CSI or PER input");
      }
      if (output != OutputKind::kChart) {
        throw ConfigError("channel charts output a chart of dimension D");
      }
      if (chart_dim != 2 && chart_dim != 3) throw ConfigError("chart_dim must be 2 or 3");
      return;
    case Family::kClassical:
      if (input != InputKind::kCsi || output != OutputKind::kPosition) {
        throw ConfigError("the classical baseline maps CSI to position");
      }
      return;
  }
}

VariantSpec VariantSpec::canonical() const {
  validate();
  VariantSpec s = *this;
  if (family == Family::kChannelChart) {
    s.input = is_csi_like(input) ? InputKind::kReducedCsi : InputKind::kReducedPer;
  }
  return s;
}

std::string VariantSpec::name() const {
  const VariantSpec s = canonical();
  const std::string in = is_csi_like(s.input) ? "CSI" : s.input == InputKind::kTaoa ? "TAoA" : "PER";
  switch (s.family) {
    case Family::kSupervised:
      return in + (s.output == OutputKind::kPosition ? "2Pos" : "2TAoA");
    case Family::kAutoencoder: return in + "-AE";
    case Family::kChannelChart: return in + "-CC";
    case Family::kClassical: return "Classical";
  }
  return "?";
}

nlohmann::json VariantSpec::to_json() const {
  return {{"name", name()},
          {"input", input_name(input)},
          {"output", output_name(output)},
          {"family", family_name(family)},
          {"latent_dim", latent_dim},
          {"chart_dim", chart_dim}};
}

VariantSpec VariantSpec::from_json(const nlohmann::json& j) {
  try {
    VariantSpec s;
    s.input = enum_from(j.at("input").get<std::string>(),
                        std::array{InputKind::kCsi, InputKind::kPer, InputKind::kTaoa,
                                   InputKind::kReducedCsi, InputKind::kReducedPer},
                        input_name, "input");
    s.output = enum_from(j.at("output").get<std::string>(),
                         std::array{OutputKind::kPosition, OutputKind::kTaoa,
                                    OutputKind::kLatent, OutputKind::kChart},
                         output_name, "output");
    s.family = enum_from(j.at("family").get<std::string>(),
                         std::array{Family::kSupervised, Family::kAutoencoder,
                                    Family::kChannelChart, Family::kClassical},
                         family_name, "family");
    s.latent_dim = j.value("latent_dim", 32);
    s.chart_dim = j.value("chart_dim", 2);
    return s.canonical();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad variant spec: ") + e.what());
  }
}

std::vector<VariantSpec> VariantSpec::all() {
  using I = InputKind;
  using O = OutputKind;
  using F = Family;
  return {
      {I::kCsi, O::kPosition, F::kSupervised},
      {I::kPer, O::kPosition, F::kSupervised},
      {I::kCsi, O::kTaoa, F::kSupervised},
      {I::kPer, O::kTaoa, F::kSupervised},
      {I::kCsi, O::kLatent, F::kAutoencoder},
      {I::kPer, O::kLatent, F::kAutoencoder},
      {I::kReducedCsi, O::kChart, F::kChannelChart},
      {I::kReducedPer, O::kChart, F::kChannelChart},
      {I::kTaoa, O::kPosition, F::kSupervised},
      {I::kCsi, O::kPosition, F::kClassical},
  };
}

std::vector<std::string> VariantSpec::names() {
  std::vector<std::string> out;
  for (const auto& s : all()) out.push_back(s.name());
  return out;
}

VariantSpec VariantSpec::by_name(const std::string& name) {
  for (const auto& s : all()) {
    if (lower(s.name()) == lower(name)) return s;
  }
  std::string valid;
  for (const auto& n : names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown variant '" + name + "'; valid variants: " + valid);
}

// --- channel normalisation and classical TAoA ---------------------------------

void ChartNormConfig::validate() const {
  if (!(pathloss_exponent > 0.0)) throw ConfigError("chart pathloss_exponent must be > 0");
  if (n_antennas < 1) throw ConfigError("chart n_antennas must be >= 1");
}

ComplexVector normalize_channel(std::span<const Complex> csi, const ChartNormConfig& cfg) {
  cfg.validate();
  double sq = 0.0;
  for (const auto& c : csi) sq += std::norm(c);
  const double fro = std::sqrt(sq);
  if (!(fro > 0.0)) throw DegenerateInputError("cannot normalise an all-zero channel");
  const double beta = cfg.pathloss_exponent;
  const double factor = std::pow(static_cast<double>(cfg.n_antennas), beta - 1.0) /
                        std::pow(fro, beta);
  ComplexVector out(csi.begin(), csi.end());
  for (auto& c : out) c *= factor;
  return out;
}

namespace {

// Vertex offset of the parabola through (-1, a), (0, b), (1, c), in [-0.5, 0.5].
double parabolic_offset(double a, double b, double c) {
  const double denom = a - 2.0 * b + c;
  if (!(denom < 0.0)) return 0.0;
  return std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
}

}  // namespace

TaoaTriple classical_taoa(std::span<const Complex> csi, const RadioConfig& radio) {
  const int q_bins = radio.angle_bins();
  const Matrix per =
      csi_to_periodogram(csi, radio.n_antennas, radio.n_subcarriers, q_bins);
  const double peak = per.maxCoeff();
  const double floor = per.minCoeff();
  if (!(peak > 0.0) || peak - floor <= 1e-12 * peak) {
    throw EstimationError("periodogram is flat; no unique peak");
  }
  // Lowest delay, then lowest angle, among values tied with the maximum.
  Eigen::Index k0 = -1, q0 = -1;
  for (Eigen::Index k = 0; k < per.rows() && k0 < 0; ++k) {
    for (Eigen::Index q = 0; q < per.cols(); ++q) {
      if (per(k, q) >= peak * (1.0 - 1e-9)) {
        k0 = k;
        q0 = q;
        break;
      }
    }
  }
  const Eigen::Index rows = per.rows();
  const Eigen::Index cols = per.cols();
  // Interpolate on magnitude (square root of power).
  auto mag = [&](Eigen::Index k, Eigen::Index q) {
    return std::sqrt(per((k + rows) % rows, (q + cols) % cols));
  };
  const double dk = parabolic_offset(mag(k0 - 1, q0), mag(k0, q0), mag(k0 + 1, q0));
  const double dq = parabolic_offset(mag(k0, q0 - 1), mag(k0, q0), mag(k0, q0 + 1));

  double u = (static_cast<double>(q0) + dq) / q_bins;
  u -= std::floor(u + 0.5);  // wrap to [-1/2, 1/2)
  const double s = std::clamp(u / radio.antenna_spacing_wavelengths, -1.0, 1.0);
  TaoaTriple out;
  out.azimuth = std::asin(s);
  out.elevation = 0.0;
  out.range = std::max(0.0, static_cast<double>(k0) + dk) * radio.sample_period() *
              kSpeedOfLight;
  return out;
}

MleConfig classical_mle_config(std::size_t n_locators, const ClassicalConfig& cfg) {
  return MleConfig::defaults(n_locators, cfg.range_sigma_m, cfg.kappa);
}

PositionEstimate classical_localise(const Sample& sample, std::span<const LocatorPose> poses,
                                    const RadioConfig& radio, const ClassicalConfig& cfg) {
  if (poses.size() < 2) throw ConfigError("classical localisation needs >= 2 locators");
  if (sample.csi.n_locators != poses.size()) {
    throw ShapeError("sample locator count does not match the poses");
  }
  std::vector<TaoaTriple> taoas;
  taoas.reserve(poses.size());
  for (std::size_t m = 0; m < poses.size(); ++m) {
    taoas.push_back(classical_taoa(sample.csi.locator(m), radio));
  }
  return joint_mle_estimate(taoas, poses, classical_mle_config(poses.size(), cfg));
}

std::vector<Vec3> classical_localise_all(const Dataset& ds, const ClassicalConfig& cfg,
                                         par::Exec exec) {
  std::vector<Vec3> out(ds.size());
  par::for_each_task(ds.size(), exec, [&](std::size_t i) {
    out[i] = classical_localise(ds.samples[i], ds.scene.locators, ds.radio, cfg).position;
  });
  return out;
}

std::vector<double> grid_averaged_errors(const Dataset& ds, std::span<const Vec3> estimates,
                                         double pitch_m) {
  if (estimates.size() != ds.size()) throw ShapeError("one estimate per sample required");
  if (!(pitch_m > 0.0)) throw ConfigError("grid pitch must be > 0");
  struct Cell {
    Vec3 est = Vec3::Zero();
    Vec3 truth = Vec3::Zero();
    std::size_t n = 0;
  };
  std::map<std::array<long long, 3>, Cell> cells;
  std::vector<std::array<long long, 3>> order;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Vec3& p = ds.samples[i].position;
    const std::array<long long, 3> key = {std::llround(p.x() / pitch_m),
                                          std::llround(p.y() / pitch_m),
                                          std::llround(p.z() / pitch_m)};
    auto [it, fresh] = cells.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.est += estimates[i];
    it->second.truth += p;
    ++it->second.n;
  }
  std::vector<double> errors;
  for (const auto& key : order) {
    const Cell& c = cells.at(key);
    const double n = static_cast<double>(c.n);
    errors.push_back((c.est / n - c.truth / n).norm());
  }
  return errors;
}

// --- features -----------------------------------------------------------------

Standardizer Standardizer::fit(const Matrix& x) {
  if (x.rows() == 0) throw ConfigError("cannot fit a standardiser on no rows");
  Standardizer s;
  s.mean = x.colwise().mean();
  s.scale.resize(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double var = (x.col(c).array() - s.mean(c)).square().mean();
    const double sd = std::sqrt(var);
    s.scale(c) = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) throw ShapeError("standardiser width mismatch");
  return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

Matrix Standardizer::invert(const Matrix& z) const {
  if (z.cols() != mean.size()) throw ShapeError("standardiser width mismatch");
  return ((z.array().rowwise() * scale.array()).rowwise() + mean.array()).matrix();
}

nlohmann::json Standardizer::to_json() const {
  return {{"mean", std::vector<double>(mean.data(), mean.data() + mean.size())},
          {"scale", std::vector<double>(scale.data(), scale.data() + scale.size())}};
}

Standardizer Standardizer::from_json(const nlohmann::json& j) {
  Standardizer s;
  const auto m = j.at("mean").get<std::vector<double>>();
  const auto sc = j.at("scale").get<std::vector<double>>();
  if (m.size() != sc.size()) throw FormatError("standardiser sizes differ");
  s.mean = Eigen::Map<const Eigen::RowVectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
  s.scale = Eigen::Map<const Eigen::RowVectorXd>(sc.data(), static_cast<Eigen::Index>(sc.size()));
  return s;
}

int feature_width_per_locator(InputKind input, const RadioConfig& radio) {
  switch (input) {
    case InputKind::kCsi: return 2 * radio.n_antennas * radio.n_subcarriers;
    case InputKind::kPer: return radio.delay_bins() * radio.angle_bins();
    case InputKind::kTaoa: return 3;
    case InputKind::kReducedCsi: return radio.n_antennas;
    case InputKind::kReducedPer: return radio.angle_bins();
  }
  return 0;
}

Matrix featurize(const Dataset& ds, InputKind input, const ChartNormConfig& norm) {
  const std::size_t n_loc = ds.n_locators();
  const int width = feature_width_per_locator(input, ds.radio);
  const auto n_ant = static_cast<std::size_t>(ds.radio.n_antennas);
  const auto n_sub = static_cast<std::size_t>(ds.radio.n_subcarriers);
  Matrix x(static_cast<Eigen::Index>(ds.size()),
           static_cast<Eigen::Index>(n_loc) * width);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Sample& smp = ds.samples[i];
    const auto row = static_cast<Eigen::Index>(i);
    for (std::size_t m = 0; m < n_loc; ++m) {
      const Eigen::Index base = static_cast<Eigen::Index>(m) * width;
      switch (input) {
        case InputKind::kCsi: {
          const auto slice = smp.csi.locator(m);
          // Remove the common phase so features do not wrap with the carrier.
          Complex rot(1.0, 0.0);
          if (std::abs(slice[0]) > 0.0) rot = std::conj(slice[0]) / std::abs(slice[0]);
          for (std::size_t j = 0; j < slice.size(); ++j) {
            const Complex v = slice[j] * rot;
            x(row, base + 2 * static_cast<Eigen::Index>(j)) = v.real();
            x(row, base + 2 * static_cast<Eigen::Index>(j) + 1) = v.imag();
          }
          break;
        }
        case InputKind::kPer: {
          const auto slice = smp.per.locator(m);
          for (std::size_t j = 0; j < slice.size(); ++j) {
            x(row, base + static_cast<Eigen::Index>(j)) = std::log1p(slice[j]);
          }
          break;
        }
        case InputKind::kTaoa: {
          const TaoaTriple& t = smp.taoa[m];
          x(row, base) = t.azimuth;
          x(row, base + 1) = t.elevation;
          x(row, base + 2) = t.range;
          break;
        }
        case InputKind::kReducedCsi: {
          const ComplexVector h = normalize_channel(smp.csi.locator(m), norm);
          for (std::size_t b = 0; b < n_ant; ++b) {
            double acc = 0.0;
            for (std::size_t s = 0; s < n_sub; ++s) acc += std::abs(h[b * n_sub + s]);
            x(row, base + static_cast<Eigen::Index>(b)) = acc / static_cast<double>(n_sub);
          }
          break;
        }
        case InputKind::kReducedPer: {
          const ComplexVector h = normalize_channel(smp.csi.locator(m), norm);
          const Matrix p = csi_to_periodogram(h, ds.radio.n_antennas,
                                              ds.radio.n_subcarriers, ds.radio.angle_bins());
          for (Eigen::Index q = 0; q < p.cols(); ++q) {
            x(row, base + q) = std::sqrt(p.col(q).mean());
          }
          break;
        }
      }
    }
  }
  return x;
}

// --- options ------------------------------------------------------------------

nlohmann::json ModelOptions::to_json() const {
  return {{"hidden", hidden},
          {"head_hidden", head_hidden},
          {"chart_beta", chart_beta},
          {"locator_onehot", locator_onehot},
          {"triplet_margin", triplet_margin},
          {"positive_window", positive_window},
          {"negative_gap", negative_gap}};
}

ModelOptions ModelOptions::from_json(const nlohmann::json& j) {
  ModelOptions o;
  try {
    o.hidden = j.value("hidden", o.hidden);
    o.head_hidden = j.value("head_hidden", o.head_hidden);
    o.chart_beta = j.value("chart_beta", o.chart_beta);
    o.locator_onehot = j.value("locator_onehot", o.locator_onehot);
    o.triplet_margin = j.value("triplet_margin", o.triplet_margin);
    o.positive_window = j.value("positive_window", o.positive_window);
    o.negative_gap = j.value("negative_gap", o.negative_gap);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad model options: ") + e.what());
  }
  for (int h : o.hidden) {
    if (h < 1) throw ConfigError("model hidden widths must be >= 1");
  }
  if (!(o.chart_beta > 0.0)) throw ConfigError("chart_beta must be > 0");
  if (!(o.triplet_margin > 0.0)) throw ConfigError("triplet_margin must be > 0");
  if (o.positive_window < 1) throw ConfigError("positive_window must be >= 1");
  return o;
}

nn::TrainConfig recommended_train_config(std::uint64_t seed) {
  nn::TrainConfig c;
  c.learning_rate = 3e-3;
  c.batch_size = 32;
  c.epochs = 60;
  c.momentum = 0.9;
  c.max_grad_norm = 1.0;
  c.early_stop_patience = 20;
  c.seed = seed;
  return c;
}

// --- model variant ------------------------------------------------------------

struct ModelVariant::Prepared {
  Matrix x;  // standardised input, n x (L * F)
  Matrix y;  // standardised target; position n x 3, TAoA n x 3L
  std::size_t n = 0;
};

namespace {

bool per_locator(const VariantSpec& s) {
  return s.family == Family::kAutoencoder ||
         (s.family == Family::kSupervised && s.output == OutputKind::kTaoa);
}

Matrix position_matrix(const Dataset& ds) {
  Matrix y(static_cast<Eigen::Index>(ds.size()), 3);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    y.row(static_cast<Eigen::Index>(i)) = ds.samples[i].position.transpose();
  }
  return y;
}

// n x 3L labels reshaped to (n*L) x 3.
Matrix taoa_rows(const Dataset& ds) {
  const std::size_t n_loc = ds.n_locators();
  Matrix y(static_cast<Eigen::Index>(ds.size() * n_loc), 3);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t m = 0; m < n_loc; ++m) {
      const auto r = static_cast<Eigen::Index>(i * n_loc + m);
      const TaoaTriple& t = ds.samples[i].taoa[m];
      y(r, 0) = t.azimuth;
      y(r, 1) = t.elevation;
      y(r, 2) = t.range;
    }
  }
  return y;
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Matrix onehot_rows(std::size_t n, std::size_t n_loc) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(n * n_loc),
                            static_cast<Eigen::Index>(n_loc));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < n_loc; ++m) {
      out(static_cast<Eigen::Index>(i * n_loc + m), static_cast<Eigen::Index>(m)) = 1.0;
    }
  }
  return out;
}

Var affine(Tape& t, Var z, const Standardizer& s) {
  const Matrix diag = s.scale.cwiseInverse().asDiagonal();
  const Matrix shift = -(s.mean.array() / s.scale.array()).matrix();
  return t.add_row(t.matmul(z, t.constant(diag)), t.constant(shift));
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

struct Triplets {
  std::vector<std::size_t> pos, neg;
};

Triplets draw_triplets(std::span<const std::size_t> anchors, std::size_t n,
                       const ModelOptions& o, std::uint64_t seed, std::uint64_t draw) {
  Rng rng = make_rng(seed, {0xcc, draw});
  const std::size_t gap = std::max<std::size_t>(1, std::min(o.negative_gap, n / 4));
  const std::size_t window = std::min(o.positive_window, n - 1);
  Triplets t;
  for (std::size_t a : anchors) {
    std::size_t p = a;
    if (window >= 1) {
      std::uniform_int_distribution<std::size_t> off(1, window);
      const std::size_t d = off(rng);
      const bool up = (rng() & 1U) != 0U;
      if (up) p = (a + d < n) ? a + d : (a >= d ? a - d : a);
      else p = (a >= d) ? a - d : (a + d < n ? a + d : a);
    }
    std::size_t q = a;
    std::uniform_int_distribution<std::size_t> any(0, n - 1);
    for (int tries = 0; tries < 64; ++tries) {
      q = any(rng);
      const std::size_t dist = q > a ? q - a : a - q;
      if (dist >= gap) break;
    }
    t.pos.push_back(p);
    t.neg.push_back(q);
  }
  return t;
}

std::vector<int> layer_dims(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> d = {in};
  d.insert(d.end(), hidden.begin(), hidden.end());
  d.push_back(out);
  return d;
}

}  // namespace

ModelVariant ModelVariant::build(const VariantSpec& spec_in, const RadioConfig& radio,
                                 std::size_t n_locators, const ModelOptions& options,
                                 std::uint64_t seed) {
  const VariantSpec spec = spec_in.canonical();
  radio.validate();
  if (n_locators < 1) throw ConfigError("model needs at least one locator");
  if ((spec.family == Family::kClassical || spec.output == OutputKind::kTaoa) &&
      n_locators < 2) {
    throw ConfigError(spec.name() + " needs >= 2 locators to localise");
  }
  if (spec.family != Family::kClassical && spec.input != InputKind::kTaoa &&
      radio.n_antennas < 2 && spec.input != InputKind::kCsi &&
      spec.input != InputKind::kReducedCsi) {
    throw ConfigError("periodogram inputs need >= 2 antennas");
  }
  ModelVariant mv;
  mv.spec_ = spec;
  mv.options_ = ModelOptions::from_json(options.to_json());
  mv.radio_ = radio;
  mv.n_locators_ = n_locators;
  mv.seed_ = seed;
  const int f = feature_width_per_locator(spec.input, radio);
  const int l = static_cast<int>(n_locators);
  const auto& h = mv.options_.hidden;
  using nn::Activation;
  switch (spec.family) {
    case Family::kSupervised:
      if (spec.output == OutputKind::kTaoa) {
        const int in = f + (mv.options_.locator_onehot ? l : 0);
        mv.net_ = nn::Mlp(layer_dims(in, h, 3), Activation::kRelu, Activation::kIdentity, seed);
      } else {
        mv.net_ = nn::Mlp(layer_dims(l * f, h, 3), Activation::kRelu, Activation::kIdentity, seed);
      }
      break;
    case Family::kAutoencoder: {
      mv.net_ = nn::Mlp(layer_dims(f, h, spec.latent_dim), Activation::kRelu,
                        Activation::kIdentity, seed);
      std::vector<int> rev(h.rbegin(), h.rend());
      mv.decoder_ = nn::Mlp(layer_dims(spec.latent_dim, rev, f), Activation::kRelu,
                            Activation::kIdentity, derive_seed(seed, {0xdec}));
      break;
    }
    case Family::kChannelChart:
      mv.net_ = nn::Mlp(layer_dims(l * f, h, spec.chart_dim), Activation::kRelu,
                        Activation::kIdentity, seed);
      break;
    case Family::kClassical:
      break;
  }
  return mv;
}

bool ModelVariant::outputs_position() const {
  return spec_.output == OutputKind::kPosition || spec_.output == OutputKind::kTaoa ||
         head_.has_value();
}

void ModelVariant::check_compatible(const Dataset& ds) const {
  if (ds.n_locators() != n_locators_) {
    throw ConfigError("dataset has " + std::to_string(ds.n_locators()) +
                      " locators; model expects " + std::to_string(n_locators_));
  }
  if (!(ds.radio == radio_)) {
    throw ConfigError("dataset radio configuration differs from the model's");
  }
}

ModelVariant::Prepared ModelVariant::prepare(const Dataset& ds) const {
  check_compatible(ds);
  Prepared p;
  p.n = ds.size();
  ChartNormConfig norm{options_.chart_beta, radio_.n_antennas};
  Matrix raw = featurize(ds, spec_.input, norm);
  const auto l = static_cast<Eigen::Index>(n_locators_);
  if (per_locator(spec_)) {
    const Matrix rows = nn::row_major_reshape(raw, raw.rows() * l, raw.cols() / l);
    p.x = nn::row_major_reshape(in_std_.apply(rows), raw.rows(), raw.cols());
  } else {
    p.x = in_std_.apply(raw);
  }
  if (spec_.output == OutputKind::kPosition || head_) {
    if (out_std_.fitted()) p.y = out_std_.apply(position_matrix(ds));
  } else if (spec_.output == OutputKind::kTaoa) {
    p.y = nn::row_major_reshape(out_std_.apply(taoa_rows(ds)), raw.rows(), 3 * l);
  }
  return p;
}

Var ModelVariant::forward_output(Tape& t, Var x) const {
  const auto n = t.value(x).rows();
  const auto l = static_cast<Eigen::Index>(n_locators_);
  const auto w = t.value(x).cols() / l;
  if (spec_.family == Family::kAutoencoder) {
    const Var rows = t.reshape(x, n * l, w);
    const Var z = t.reshape(net_.forward(t, rows), n, l * spec_.latent_dim);
    if (!head_) return z;
    return head_->forward(t, affine(t, z, head_std_));
  }
  if (per_locator(spec_)) {
    Var rows = t.reshape(x, n * l, w);
    if (options_.locator_onehot) {
      rows = t.concat_cols(rows, t.constant(onehot_rows(static_cast<std::size_t>(n), n_locators_)));
    }
    return t.reshape(net_.forward(t, rows), n, 3 * l);
  }
  return net_.forward(t, x);
}

Matrix ModelVariant::forward_output(const Matrix& x) const {
  const auto n = x.rows();
  const auto l = static_cast<Eigen::Index>(n_locators_);
  const auto w = x.cols() / l;
  if (spec_.family == Family::kAutoencoder) {
    const Matrix z = nn::row_major_reshape(net_.forward(nn::row_major_reshape(x, n * l, w)),
                                           n, l * spec_.latent_dim);
    if (!head_) return z;
    return head_->forward(head_std_.apply(z));
  }
  if (per_locator(spec_)) {
    Matrix rows = nn::row_major_reshape(x, n * l, w);
    if (options_.locator_onehot) {
      Matrix aug(rows.rows(), rows.cols() + l);
      aug << rows, onehot_rows(static_cast<std::size_t>(n), n_locators_);
      rows = std::move(aug);
    }
    return nn::row_major_reshape(net_.forward(rows), n, 3 * l);
  }
  return net_.forward(x);
}

Var ModelVariant::objective(Tape& t, const Prepared& data, std::span<const std::size_t> rows,
                            std::uint64_t draw) const {
  const Matrix xb = select_rows(data.x, rows);
  switch (spec_.family) {
    case Family::kAutoencoder: {
      if (head_) {
        return nn::mse_loss(t, forward_output(t, t.constant(xb)),
                            t.constant(select_rows(data.y, rows)));
      }
      const auto l = static_cast<Eigen::Index>(n_locators_);
      const Var x = t.constant(nn::row_major_reshape(xb, xb.rows() * l, xb.cols() / l));
      return nn::recon_loss(t, net_, decoder_, x);
    }
    case Family::kChannelChart: {
      const Triplets tr = draw_triplets(rows, data.n, options_, seed_, draw);
      const Var a = net_.forward(t, t.constant(xb));
      const Var p = net_.forward(t, t.constant(select_rows(data.x, tr.pos)));
      const Var q = net_.forward(t, t.constant(select_rows(data.x, tr.neg)));
      return nn::triplet_loss(t, a, p, q, options_.triplet_margin);
    }
    case Family::kSupervised:
      return nn::mse_loss(t, forward_output(t, t.constant(xb)),
                          t.constant(select_rows(data.y, rows)));
    case Family::kClassical:
      break;
  }
  throw ConfigError("the classical baseline has no training objective");
}

std::vector<std::vector<nn::Parameter*>> ModelVariant::layer_groups() {
  std::vector<std::vector<nn::Parameter*>> groups;
  auto add = [&](nn::Mlp& m) {
    for (std::size_t i = 0; i < m.n_layers(); ++i) {
      groups.push_back({&m.layer(i).weight, &m.layer(i).bias});
    }
  };
  if (spec_.family == Family::kClassical) return groups;
  add(net_);
  if (spec_.family == Family::kAutoencoder) {
    if (head_) add(*head_);
    else add(decoder_);
  }
  return groups;
}

std::vector<nn::Parameter*> ModelVariant::parameters() {
  std::vector<nn::Parameter*> out;
  for (auto& g : layer_groups()) out.insert(out.end(), g.begin(), g.end());
  return out;
}

std::vector<const nn::Parameter*> ModelVariant::parameters() const {
  std::vector<const nn::Parameter*> out;
  for (auto* p : const_cast<ModelVariant&>(*this).parameters()) out.push_back(p);
  return out;
}

std::string ModelVariant::backbone_hash() const {
  return nn::parameter_hash(net_.parameters());
}

nn::LossHistory ModelVariant::train_networks(const Dataset& train, const Dataset* val,
                                             const nn::TrainConfig& cfg) {
  const Prepared data = prepare(train);
  std::optional<Prepared> vdata;
  if (val != nullptr && !val->empty()) vdata = prepare(*val);
  auto params = parameters();
  const nn::BatchLoss loss = [&](Tape& t, std::span<const std::size_t> rows) {
    return objective(t, data, rows, draws_++);
  };
  nn::ValidationLoss vloss;
  if (vdata) {
    vloss = [&]() {
      std::vector<std::size_t> all(vdata->n);
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      Tape t;
      return t.scalar(objective(t, *vdata, all, 0));
    };
  }
  nn::TrainConfig c = cfg;
  c.first_epoch = cfg.first_epoch + history_.train.size();
  const nn::LossHistory h = nn::train(params, loss, data.n, c, vloss);
  history_.train.insert(history_.train.end(), h.train.begin(), h.train.end());
  history_.val.insert(history_.val.end(), h.val.begin(), h.val.end());
  history_.best_epoch = h.best_epoch;
  return h;
}

nn::LossHistory ModelVariant::fit(const Dataset& train, const Dataset* val,
                                  const nn::TrainConfig& cfg) {
  if (spec_.family == Family::kClassical) {
    throw ConfigError("the classical baseline is not trainable");
  }
  check_compatible(train);
  if (train.empty()) throw ConfigError("training set is empty");
  if (!in_std_.fitted()) {
    ChartNormConfig norm{options_.chart_beta, radio_.n_antennas};
    const Matrix raw = featurize(train, spec_.input, norm);
    const auto l = static_cast<Eigen::Index>(n_locators_);
    in_std_ = per_locator(spec_)
                  ? Standardizer::fit(nn::row_major_reshape(raw, raw.rows() * l, raw.cols() / l))
                  : Standardizer::fit(raw);
    if (spec_.output == OutputKind::kPosition) {
      out_std_ = Standardizer::fit(position_matrix(train));
    } else if (spec_.output == OutputKind::kTaoa) {
      out_std_ = Standardizer::fit(taoa_rows(train));
    }
  }
  const nn::LossHistory h = train_networks(train, val, cfg);
  if (spec_.output == OutputKind::kTaoa) fit_mle_noise(val != nullptr && !val->empty() ? *val : train);
  return h;
}

nn::LossHistory ModelVariant::refit(const Dataset& train, const Dataset* val,
                                    const nn::TrainConfig& cfg) {
  if (!in_std_.fitted()) return fit(train, val, cfg);
  check_compatible(train);
  const nn::LossHistory h = train_networks(train, val, cfg);
  if (spec_.output == OutputKind::kTaoa) fit_mle_noise(val != nullptr && !val->empty() ? *val : train);
  return h;
}

void ModelVariant::fit_mle_noise(const Dataset& ds) {
  const auto pred = predict_taoa(ds);
  double range_sq = 0.0, angle_sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t m = 0; m < n_locators_; ++m) {
      const Vec3 u = angles_to_unit_vector(pred[i][m].azimuth, pred[i][m].elevation);
      const Vec3 v = angles_to_unit_vector(ds.samples[i].taoa[m].azimuth,
                                           ds.samples[i].taoa[m].elevation);
      const double dr = pred[i][m].range - ds.samples[i].taoa[m].range;
      range_sq += dr * dr;
      angle_sq += std::pow(std::acos(std::clamp(u.dot(v), -1.0, 1.0)), 2);
      ++n;
    }
  }
  const double dn = static_cast<double>(std::max<std::size_t>(n, 1));
  mle_range_sigma_ = std::max(0.02, std::sqrt(range_sq / dn));
  // von Mises concentration ~ 1 / angular variance.
  mle_kappa_ = std::clamp(dn / std::max(angle_sq, 1e-12), 1.0, 1e4);
}

std::vector<std::vector<TaoaTriple>> ModelVariant::predict_taoa(const Dataset& ds) const {
  if (spec_.output != OutputKind::kTaoa) {
    throw ConfigError(spec_.name() + " does not output TAoA");
  }
  const Prepared p = prepare(ds);
  const Matrix z = forward_output(p.x);
  const auto l = static_cast<Eigen::Index>(n_locators_);
  const Matrix raw = out_std_.invert(nn::row_major_reshape(z, z.rows() * l, 3));
  std::vector<std::vector<TaoaTriple>> out(ds.size(), std::vector<TaoaTriple>(n_locators_));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t m = 0; m < n_locators_; ++m) {
      const auto r = static_cast<Eigen::Index>(i * n_locators_ + m);
      TaoaTriple& t = out[i][m];
      t.azimuth = wrap_angle(raw(r, 0));
      t.elevation = std::clamp(raw(r, 1), -kPi / 2, kPi / 2);
      t.range = std::max(0.0, raw(r, 2));
    }
  }
  return out;
}

MleConfig ModelVariant::mle_config() const {
  if (spec_.family == Family::kClassical) return classical_mle_config(n_locators_, classical_);
  return MleConfig::defaults(n_locators_, mle_range_sigma_, mle_kappa_);
}

std::vector<Vec3> ModelVariant::predict_positions(const Dataset& ds, par::Exec exec) const {
  check_compatible(ds);
  if (spec_.family == Family::kClassical) {
    return classical_localise_all(ds, classical_, exec);
  }
  std::vector<Vec3> out(ds.size());
  if (spec_.output == OutputKind::kTaoa) {
    const auto taoa = predict_taoa(ds);
    const MleConfig cfg = mle_config();
    par::for_each_task(ds.size(), exec, [&](std::size_t i) {
      out[i] = joint_mle_estimate(taoa[i], ds.scene.locators, cfg).position;
    });
    return out;
  }
  if (!outputs_position()) {
    throw ConfigError(spec_.name() + " has no position output; attach a head first");
  }
  const Prepared p = prepare(ds);
  const Matrix y = out_std_.invert(forward_output(p.x));
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = y.row(static_cast<Eigen::Index>(i)).transpose();
  return out;
}

Matrix ModelVariant::embed(const Dataset& ds) const {
  if (spec_.family != Family::kAutoencoder && spec_.family != Family::kChannelChart) {
    throw ConfigError(spec_.name() + " has no latent or chart output");
  }
  const Prepared p = prepare(ds);
  if (spec_.family == Family::kChannelChart) return net_.forward(p.x);
  const auto l = static_cast<Eigen::Index>(n_locators_);
  const Matrix rows = nn::row_major_reshape(p.x, p.x.rows() * l, p.x.cols() / l);
  return nn::row_major_reshape(net_.forward(rows), p.x.rows(), l * spec_.latent_dim);
}

Matrix ModelVariant::embed_locator(const Dataset& ds, std::size_t locator) const {
  if (spec_.family != Family::kAutoencoder) {
    throw ConfigError(spec_.name() + " has no per-locator latent space");
  }
  if (locator >= n_locators_) throw ConfigError("locator index out of range");
  const Matrix z = embed(ds);
  return z.middleCols(static_cast<Eigen::Index>(locator) * spec_.latent_dim, spec_.latent_dim);
}

double ModelVariant::loss(const Dataset& ds) const {
  if (spec_.family == Family::kClassical) {
    throw ConfigError("the classical baseline has no training objective");
  }
  const Prepared p = prepare(ds);
  if (p.n == 0) throw ConfigError("cannot evaluate a loss on an empty dataset");
  std::vector<std::size_t> all(p.n);
  for (std::size_t i = 0; i < p.n; ++i) all[i] = i;
  Tape t;
  return t.scalar(objective(t, p, all, 0));
}

double ModelVariant::normalized_loss(const Dataset& ds) const {
  return loss(ds) / trivial_loss(ds);
}

double ModelVariant::trivial_loss(const Dataset& ds) const {
  if (spec_.family == Family::kClassical) {
    throw ConfigError("the classical baseline has no training objective");
  }
  double trivial = 0.0;
  if (spec_.family == Family::kChannelChart) {
    trivial = options_.triplet_margin;
  } else {
    const Prepared p = prepare(ds);
    Matrix target;
    if (spec_.family == Family::kAutoencoder && !head_) {
      const auto n = static_cast<Eigen::Index>(n_locators_);
      target = nn::row_major_reshape(p.x, p.x.rows() * n, p.x.cols() / n);
    } else {
      target = p.y;
    }
    const Eigen::RowVectorXd mean = target.colwise().mean();
    trivial = (target.rowwise() - mean).rowwise().squaredNorm().mean();
  }
  if (!(trivial > 0.0)) throw NumericError("trivial-predictor loss is zero");
  return trivial;
}

nn::LossHistory ModelVariant::attach_head(const Dataset& labelled, const Dataset* val,
                                          const nn::TrainConfig& cfg, std::uint64_t seed) {
  if (spec_.family != Family::kAutoencoder) {
    throw ConfigError("heads attach to autoencoder backbones only");
  }
  if (!in_std_.fitted()) throw ConfigError("backbone is not trained");
  if (labelled.empty()) throw ConfigError("head training needs at least one label");
  check_compatible(labelled);
  const std::string before = backbone_hash();
  const Matrix z = embed(labelled);
  head_std_ = Standardizer::fit(z);
  out_std_ = Standardizer::fit(position_matrix(labelled));
  const int in = static_cast<int>(n_locators_) * spec_.latent_dim;
  head_ = nn::Mlp(layer_dims(in, options_.head_hidden, 3), nn::Activation::kRelu,
                  nn::Activation::kIdentity, seed);
  const Matrix zs = head_std_.apply(z);
  const Matrix ys = out_std_.apply(position_matrix(labelled));
  Matrix zv, yv;
  if (val != nullptr && !val->empty()) {
    zv = head_std_.apply(embed(*val));
    yv = out_std_.apply(position_matrix(*val));
  }
  auto params = head_->parameters();
  nn::Mlp& head = *head_;
  const nn::BatchLoss loss = [&](Tape& t, std::span<const std::size_t> rows) {
    return nn::mse_loss(t, head.forward(t, t.constant(select_rows(zs, rows))),
                        t.constant(select_rows(ys, rows)));
  };
  nn::ValidationLoss vloss;
  if (zv.rows() > 0) {
    vloss = [&]() {
      const Matrix pred = head.forward(zv);
      return (pred - yv).rowwise().squaredNorm().mean();
    };
  }
  const nn::LossHistory h = nn::train(params, loss, labelled.size(), cfg, vloss);
  if (backbone_hash() != before) {
    throw std::logic_error("backbone parameters changed during head training");
  }
  return h;
}

// --- checkpoints ----------------------------------------------------------------

nn::Checkpoint ModelVariant::to_checkpoint() const {
  nn::Checkpoint c;
  nlohmann::json nets = nlohmann::json::object();
  std::vector<const nn::Parameter*> all;
  auto add = [&](const char* role, const nn::Mlp& m) {
    nets[role] = m.architecture();
    const auto ps = m.parameters();
    all.insert(all.end(), ps.begin(), ps.end());
  };
  if (spec_.family != Family::kClassical) add("net", net_);
  if (spec_.family == Family::kAutoencoder) add("decoder", decoder_);
  if (head_) add("head", *head_);
  c.header = {{"variant", spec_.to_json()},
              {"options", options_.to_json()},
              {"radio",
               {{"carrier_hz", radio_.carrier_hz},
                {"bandwidth_hz", radio_.bandwidth_hz},
                {"n_subcarriers", radio_.n_subcarriers},
                {"n_antennas", radio_.n_antennas},
                {"channel_order", radio_.channel_order},
                {"antenna_spacing_wavelengths", radio_.antenna_spacing_wavelengths}}},
              {"n_locators", n_locators_},
              {"seed", seed_},
              {"networks", nets},
              {"mle", {{"range_sigma_m", mle_range_sigma_}, {"kappa", mle_kappa_}}},
              {"classical", {{"range_sigma_m", classical_.range_sigma_m},
                             {"kappa", classical_.kappa}}},
              {"history", {{"train", history_.train}, {"val", history_.val},
                           {"best_epoch", history_.best_epoch}}},
              {"draws", draws_},
              {"layout", "values then momentum buffers"}};
  if (in_std_.fitted()) c.header["input_standardizer"] = in_std_.to_json();
  if (out_std_.fitted()) c.header["output_standardizer"] = out_std_.to_json();
  if (head_std_.fitted()) c.header["head_standardizer"] = head_std_.to_json();
  c.values = nn::flatten(all);
  const auto vel = nn::flatten_velocity(all);
  c.values.insert(c.values.end(), vel.begin(), vel.end());
  return c;
}

ModelVariant ModelVariant::from_checkpoint(const nn::Checkpoint& ckpt) {
  const auto& h = ckpt.header;
  if (!h.is_object() || !h.contains("variant")) {
    throw FormatError("checkpoint has no \"variant\" key");
  }
  ModelVariant mv;
  try {
    mv.spec_ = VariantSpec::from_json(h.at("variant"));
    mv.options_ = ModelOptions::from_json(h.at("options"));
    const auto& r = h.at("radio");
    mv.radio_.carrier_hz = r.at("carrier_hz").get<double>();
    mv.radio_.bandwidth_hz = r.at("bandwidth_hz").get<double>();
    mv.radio_.n_subcarriers = r.at("n_subcarriers").get<int>();
    mv.radio_.n_antennas = r.at("n_antennas").get<int>();
    mv.radio_.channel_order = r.at("channel_order").get<int>();
    mv.radio_.antenna_spacing_wavelengths = r.at("antenna_spacing_wavelengths").get<double>();
    mv.n_locators_ = h.at("n_locators").get<std::size_t>();
    mv.seed_ = h.at("seed").get<std::uint64_t>();
    const auto& nets = h.at("networks");
    if (nets.contains("net")) mv.net_ = nn::Mlp::from_architecture(nets.at("net"));
    if (nets.contains("decoder")) mv.decoder_ = nn::Mlp::from_architecture(nets.at("decoder"));
    if (nets.contains("head")) mv.head_ = nn::Mlp::from_architecture(nets.at("head"));
    mv.mle_range_sigma_ = h.at("mle").at("range_sigma_m").get<double>();
    mv.mle_kappa_ = h.at("mle").at("kappa").get<double>();
    mv.classical_.range_sigma_m = h.at("classical").at("range_sigma_m").get<double>();
    mv.classical_.kappa = h.at("classical").at("kappa").get<double>();
    mv.history_.train = h.at("history").at("train").get<std::vector<double>>();
    mv.history_.val = h.at("history").at("val").get<std::vector<double>>();
    mv.history_.best_epoch = h.at("history").at("best_epoch").get<std::size_t>();
    mv.draws_ = h.at("draws").get<std::uint64_t>();
    if (h.contains("input_standardizer")) mv.in_std_ = Standardizer::from_json(h.at("input_standardizer"));
    if (h.contains("output_standardizer")) mv.out_std_ = Standardizer::from_json(h.at("output_standardizer"));
    if (h.contains("head_standardizer")) mv.head_std_ = Standardizer::from_json(h.at("head_standardizer"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad checkpoint header: ") + e.what());
  }
  std::vector<nn::Parameter*> all;
  auto add = [&](nn::Mlp& m) {
    const auto ps = m.parameters();
    all.insert(all.end(), ps.begin(), ps.end());
  };
  if (mv.spec_.family != Family::kClassical) add(mv.net_);
  if (mv.spec_.family == Family::kAutoencoder) add(mv.decoder_);
  if (mv.head_) add(*mv.head_);
  std::size_t count = 0;
  for (auto* p : all) count += static_cast<std::size_t>(p->value.size());
  if (ckpt.values.size() != 2 * count) {
    throw FormatError("checkpoint holds " + std::to_string(ckpt.values.size()) +
                      " values; architecture needs " + std::to_string(2 * count));
  }
  const std::span<const double> values(ckpt.values);
  nn::unflatten(all, values.first(count));
  nn::unflatten_velocity(all, values.subspan(count));
  return mv;
}

}  // namespace radiobench
