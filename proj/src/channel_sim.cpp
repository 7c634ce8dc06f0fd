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

#include "radiobench/channel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "radiobench/dataset.hpp"
#include "radiobench/errors.hpp"
#include "radiobench/rng.hpp"

namespace radiobench {
namespace {

constexpr double kTwoPi = 2.0 * kPi;

// Rotation per unit of MicroLocator magnitude (radians, per axis draw).
constexpr double kLocatorRotationPerUnit = 0.2;

double sinc(double x) {
  if (x == std::nearbyint(x)) return x == 0.0 ? 1.0 : 0.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

Complex unit_phasor(double angle) { return {std::cos(angle), std::sin(angle)}; }

}  // namespace

void RadioConfig::validate() const {
  if (n_subcarriers < 2) throw ConfigError("n_subcarriers must be >= 2");
  if (channel_order < 1) throw ConfigError("channel_order must be >= 1");
  if (channel_order > n_subcarriers) {
    throw ConfigError("channel_order must not exceed n_subcarriers");
  }
  if (n_antennas < 1) throw ConfigError("n_antennas must be >= 1");
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz must be > 0");
  if (!(carrier_hz > 0.0)) throw ConfigError("carrier_hz must be > 0");
  if (!(antenna_spacing_wavelengths > 0.0)) {
    throw ConfigError("antenna_spacing_wavelengths must be > 0");
  }
}

void SceneConfig::validate() const {
  if (locators.empty()) throw ConfigError("scene has no locators");
  for (const auto& l : locators) {
    if (!l.is_valid()) {
      throw ConfigError("locators: orientation must be orthonormal, det +1");
    }
  }
  bounds.validate();
  for (const auto& s : scatterers) {
    if (!(s.reflectivity >= 0.0 && s.reflectivity <= 1.0)) {
      throw ConfigError("scatterers: reflectivity must lie in [0, 1]");
    }
    if (!s.position.allFinite()) throw ConfigError("scatterers: bad position");
  }
  if (!(pathloss_exponent > 0.0) || !std::isfinite(pathloss_exponent)) {
    throw ConfigError("pathloss_exponent must be > 0");
  }
}

ComplexVector synthesize_cir(std::span<const PathComponent> paths,
                             const RadioConfig& radio) {
  const int order = radio.channel_order;
  const double ts = radio.sample_period();
  const double span = order * ts;
  ComplexVector h(static_cast<std::size_t>(order), Complex(0.0, 0.0));
  for (const auto& p : paths) {
    if (!(p.delay >= 0.0) || !(p.delay < span)) {
      throw DomainError("path delay " + std::to_string(p.delay) +
                        " s outside channel span [0, " + std::to_string(span) +
                        ")");
    }
    if (!(p.attenuation >= 0.0)) {
      throw DomainError("path attenuation must be >= 0");
    }
    const Complex gain =
        p.attenuation * unit_phasor(kTwoPi * radio.carrier_hz * p.delay + p.phase);
    const double offset = p.delay / ts;
    for (int k = 0; k < order; ++k) {
      h[static_cast<std::size_t>(k)] += gain * sinc(k - offset);
    }
  }
  return h;
}

double steering_frequency(double azimuth, const RadioConfig& radio) {
  return radio.antenna_spacing_wavelengths * std::sin(azimuth);
}

std::vector<std::vector<PathComponent>> scene_to_paths(
    const SceneConfig& scene, std::size_t locator_idx, const Vec3& user,
    const RadioConfig& radio) {
  if (locator_idx >= scene.locators.size()) {
    throw ConfigError("locator index out of range");
  }
  if (!scene.bounds.contains(user)) {
    throw DomainError("user position outside scene bounds");
  }
  const LocatorPose& pose = scene.locators[locator_idx];
  const double half_beta = 0.5 * scene.pathloss_exponent;

  struct Ray {
    double attenuation, phase, delay, azimuth;
  };
  std::vector<Ray> rays;
  const TaoaTriple los = position_to_taoa(pose, user);
  rays.push_back({std::pow(los.range, -half_beta), 0.0,
                  los.range / kSpeedOfLight, los.azimuth});
  for (std::size_t s = 0; s < scene.scatterers.size(); ++s) {
    const Scatterer& sc = scene.scatterers[s];
    const double d1 = (sc.position - pose.position).norm();
    const double d2 = (user - sc.position).norm();
    if (!(d1 > 0.0) || !(d2 > 0.0)) continue;
    const double length = d1 + d2;
    Rng rng = make_rng(scene.seed, {0x5ca7, s});
    const double phase = std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
    rays.push_back({sc.reflectivity * std::pow(length, -half_beta), phase,
                    length / kSpeedOfLight,
                    position_to_taoa(pose, sc.position).azimuth});
  }

  std::vector<std::vector<PathComponent>> per_antenna(
      static_cast<std::size_t>(radio.n_antennas));
  for (int b = 0; b < radio.n_antennas; ++b) {
    auto& list = per_antenna[static_cast<std::size_t>(b)];
    for (std::size_t r = 0; r < rays.size(); ++r) {
      const Ray& ray = rays[r];
      const double steer =
          kTwoPi * b * steering_frequency(ray.azimuth, radio);
      list.push_back({ray.attenuation, ray.phase + steer, ray.delay,
                      static_cast<int>(r), 0});
    }
  }
  return per_antenna;
}

std::vector<ComplexVector> cir_to_csi(std::span<const ComplexVector> cirs,
                                      const RadioConfig& radio) {
  const auto n = static_cast<std::size_t>(radio.n_subcarriers);
  const auto order = static_cast<std::size_t>(radio.channel_order);
  // twiddle[m] = exp(-j 2 pi m / N)
  ComplexVector twiddle(n);
  for (std::size_t m = 0; m < n; ++m) {
    twiddle[m] = unit_phasor(-kTwoPi * static_cast<double>(m) / n);
  }
  std::vector<ComplexVector> out;
  out.reserve(cirs.size());
  for (const auto& h : cirs) {
    if (h.size() != order) {
      throw ShapeError("CIR length " + std::to_string(h.size()) +
                       " does not match channel order " + std::to_string(order));
    }
    ComplexVector csi(n, Complex(0.0, 0.0));
    for (std::size_t s = 0; s < n; ++s) {
      Complex acc(0.0, 0.0);
      for (std::size_t k = 0; k < order; ++k) acc += h[k] * twiddle[(s * k) % n];
      csi[s] = acc;
    }
    out.push_back(std::move(csi));
  }
  return out;
}

ComplexVector csi_to_cir(std::span<const Complex> csi, std::size_t taps) {
  const std::size_t n = csi.size();
  if (taps > n) throw ShapeError("cannot recover more taps than subcarriers");
  ComplexVector h(taps);
  for (std::size_t k = 0; k < taps; ++k) {
    Complex acc(0.0, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      acc += csi[s] * unit_phasor(kTwoPi * static_cast<double>((s * k) % n) / n);
    }
    h[k] = acc / static_cast<double>(n);
  }
  return h;
}

double angle_bin_frequency(int q, int angle_bins) {
  const double u = static_cast<double>(q) / angle_bins;
  return u >= 0.5 ? u - 1.0 : u;
}

int nearest_angle_bin(double spatial_frequency, int angle_bins) {
  double u = spatial_frequency - std::floor(spatial_frequency);  // [0, 1)
  int q = static_cast<int>(std::lround(u * angle_bins));
  return q % angle_bins;
}

Eigen::MatrixXd csi_to_periodogram(std::span<const Complex> csi,
                                   int n_antennas, int n_subcarriers,
                                   int angle_bins) {
  if (n_antennas < 2) {
    throw DegenerateInputError(
        "periodogram needs at least 2 antennas to resolve angle");
  }
  const auto b_count = static_cast<std::size_t>(n_antennas);
  const auto n = static_cast<std::size_t>(n_subcarriers);
  const auto q_count = static_cast<std::size_t>(angle_bins);
  if (csi.size() != b_count * n) {
    throw ShapeError("CSI slice size does not match antennas x subcarriers");
  }
  // Delay transform per antenna: y_b[k] = sum_s H_b[s] exp(+j 2 pi s k / N).
  ComplexVector delay_twiddle(n);
  for (std::size_t m = 0; m < n; ++m) {
    delay_twiddle[m] = unit_phasor(kTwoPi * static_cast<double>(m) / n);
  }
  ComplexVector delay(b_count * n, Complex(0.0, 0.0));
  for (std::size_t b = 0; b < b_count; ++b) {
    for (std::size_t k = 0; k < n; ++k) {
      Complex acc(0.0, 0.0);
      for (std::size_t s = 0; s < n; ++s) {
        acc += csi[b * n + s] * delay_twiddle[(s * k) % n];
      }
      delay[b * n + k] = acc;
    }
  }
  // Zero-padded angle transform: Z[k, q] = sum_b y_b[k] exp(-j 2 pi b q / Q).
  ComplexVector angle_twiddle(q_count);
  for (std::size_t m = 0; m < q_count; ++m) {
    angle_twiddle[m] = unit_phasor(-kTwoPi * static_cast<double>(m) / q_count);
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n),
                      static_cast<Eigen::Index>(q_count));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t q = 0; q < q_count; ++q) {
      Complex acc(0.0, 0.0);
      for (std::size_t b = 0; b < b_count; ++b) {
        acc += delay[b * n + k] * angle_twiddle[(b * q) % q_count];
      }
      out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(q)) =
          std::norm(acc);
    }
  }
  return out;
}

std::vector<Vec3> grid_points(const Box& bounds, const GridSampling& grid) {
  if (!(grid.pitch_m > 0.0)) throw ConfigError("grid pitch must be > 0");
  const double x0 = bounds.lo.x() + grid.margin_m;
  const double y0 = bounds.lo.y() + grid.margin_m;
  const double wx = bounds.hi.x() - grid.margin_m - x0;
  const double wy = bounds.hi.y() - grid.margin_m - y0;
  if (wx < 0.0 || wy < 0.0) throw ConfigError("grid margin exceeds bounds");
  const auto nx = static_cast<std::size_t>(std::floor(wx / grid.pitch_m + 1e-9)) + 1;
  const auto ny = static_cast<std::size_t>(std::floor(wy / grid.pitch_m + 1e-9)) + 1;
  std::vector<Vec3> pts;
  pts.reserve(nx * ny);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      pts.emplace_back(x0 + static_cast<double>(ix) * grid.pitch_m,
                       y0 + static_cast<double>(iy) * grid.pitch_m,
                       grid.height_m);
    }
  }
  return pts;
}

Dataset simulate_dataset(const SceneConfig& scene, const RadioConfig& radio,
                         const Sampling& sampling, std::size_t n_samples,
                         double noise_std, std::uint64_t seed,
                         par::Exec exec) {
  scene.validate();
  radio.validate();
  if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");

  std::vector<Vec3> grid;
  if (const auto* g = std::get_if<GridSampling>(&sampling)) {
    grid = grid_points(scene.bounds, *g);
  }

  const std::size_t n_loc = scene.locators.size();
  const auto n_ant = static_cast<std::size_t>(radio.n_antennas);
  const auto n_sub = static_cast<std::size_t>(radio.n_subcarriers);

  Dataset ds;
  ds.name = "simulated";
  ds.scene = scene;
  ds.radio = radio;
  ds.samples.resize(n_samples);

  par::for_each_index(n_samples, exec, [&](std::size_t i) {
    Rng rng = make_rng(seed, {i});
    Sample& smp = ds.samples[i];
    smp.time_index = i;
    if (!grid.empty()) {
      smp.position = grid[i % grid.size()];
    } else if (const auto* c = std::get_if<CircleTrajectory>(&sampling)) {
      const double a = c->phase + kTwoPi * c->turns * static_cast<double>(i) /
                                      static_cast<double>(n_samples);
      smp.position = c->centre + c->radius_m * Vec3(std::cos(a), std::sin(a), 0.0);
    } else {
      const auto& u = std::get<UniformSampling>(sampling);
      std::uniform_real_distribution<double> ux(scene.bounds.lo.x() + u.margin_m,
                                                scene.bounds.hi.x() - u.margin_m);
      std::uniform_real_distribution<double> uy(scene.bounds.lo.y() + u.margin_m,
                                                scene.bounds.hi.y() - u.margin_m);
      const double x = ux(rng);
      const double y = uy(rng);
      smp.position = Vec3(x, y, u.height_m);
    }

    smp.csi.n_locators = n_loc;
    smp.csi.n_antennas = n_ant;
    smp.csi.n_subcarriers = n_sub;
    smp.csi.values.resize(n_loc * n_ant * n_sub);
    smp.per.n_locators = n_loc;
    smp.per.n_delay = static_cast<std::size_t>(radio.delay_bins());
    smp.per.n_angle = static_cast<std::size_t>(radio.angle_bins());
    smp.per.values.resize(n_loc * smp.per.locator_size());
    smp.taoa.resize(n_loc);

    std::normal_distribution<double> noise(0.0, noise_std / std::sqrt(2.0));
    for (std::size_t m = 0; m < n_loc; ++m) {
      smp.taoa[m] = position_to_taoa(scene.locators[m], smp.position);
      const auto paths = scene_to_paths(scene, m, smp.position, radio);
      std::vector<ComplexVector> cirs;
      cirs.reserve(paths.size());
      for (const auto& p : paths) cirs.push_back(synthesize_cir(p, radio));
      const auto csi = cir_to_csi(cirs, radio);
      auto slice = smp.csi.locator(m);
      for (std::size_t b = 0; b < n_ant; ++b) {
        for (std::size_t s = 0; s < n_sub; ++s) {
          Complex v = csi[b][s];
          if (noise_std > 0.0) {
            const double re = noise(rng);
            const double im = noise(rng);
            v += Complex(re, im);
          }
          slice[b * n_sub + s] = v;
        }
      }
      if (n_ant >= 2) {
        const Eigen::MatrixXd per = csi_to_periodogram(
            slice, radio.n_antennas, radio.n_subcarriers, radio.angle_bins());
        double* dst = smp.per.values.data() + m * smp.per.locator_size();
        for (Eigen::Index k = 0; k < per.rows(); ++k) {
          for (Eigen::Index q = 0; q < per.cols(); ++q) {
            dst[k * per.cols() + q] = per(k, q);
          }
        }
      }
    }
  });
  return ds;
}

SceneConfig apply_shift(const SceneConfig& scene, const ShiftSpec& spec) {
  if (!(spec.magnitude >= 0.0)) throw ConfigError("shift magnitude must be >= 0");
  if (spec.magnitude == 0.0) return scene;
  SceneConfig out = scene;
  const double mag = spec.magnitude;
  Rng rng = make_rng(spec.seed, {static_cast<std::uint64_t>(spec.kind)});
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Box& b = scene.bounds;
  switch (spec.kind) {
    case ShiftKind::kMacroEnvironment: {
      for (auto& s : out.scatterers) {
        for (int a = 0; a < 3; ++a) {
          s.position[a] = std::clamp(s.position[a] + mag * gauss(rng), b.lo[a],
                                     b.hi[a]);
        }
        s.reflectivity =
            std::clamp(s.reflectivity + 0.25 * mag * gauss(rng), 0.0, 1.0);
      }
      out.pathloss_exponent =
          std::max(1.0, out.pathloss_exponent + 0.25 * mag * gauss(rng));
      break;
    }
    case ShiftKind::kMicroLocator: {
      for (auto& l : out.locators) {
        const Vec3 move(gauss(rng), gauss(rng), gauss(rng));
        const Vec3 rot(gauss(rng), gauss(rng), gauss(rng));
        l.position += mag * move;
        const Vec3 rotvec = kLocatorRotationPerUnit * mag * rot;
        l.orientation = rotation_about_axis(rotvec, rotvec.norm()) * l.orientation;
      }
      break;
    }
    case ShiftKind::kMicroScattering: {
      const auto count = static_cast<std::size_t>(std::ceil(mag));
      const Vec3 c = b.centre();
      const Vec3 half = 0.3 * b.extent();
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      std::uniform_real_distribution<double> refl(0.3, 0.9);
      for (std::size_t i = 0; i < count; ++i) {
        Vec3 p;
        for (int a = 0; a < 3; ++a) p[a] = c[a] + half[a] * unit(rng);
        out.scatterers.push_back({p, refl(rng)});
      }
      break;
    }
  }
  return out;
}

SceneConfig hall_scene(std::size_t n_scatterers, double reflectivity,
                       std::uint64_t seed, double height_m) {
  SceneConfig scene;
  scene.bounds = Box{Vec3(0, 0, 0), Vec3(10, 8, 3)};
  scene.seed = seed;
  const std::vector<Vec3> spots = {{0, 0, height_m},  {5, 0, height_m},
                                   {10, 0, height_m}, {10, 8, height_m},
                                   {5, 8, height_m},  {0, 8, height_m}};
  const Vec3 centre(5, 4, height_m);
  for (const auto& s : spots) {
    scene.locators.push_back({s, facing_orientation(centre - s)});
  }
  Rng rng = make_rng(seed, {0x5ca77e});
  std::uniform_real_distribution<double> ux(0.5, 9.5), uy(0.5, 7.5), uz(0.5, 2.5);
  for (std::size_t i = 0; i < n_scatterers; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    const double z = uz(rng);
    scene.scatterers.push_back({Vec3(x, y, z), reflectivity});
  }
  return scene;
}

RadioConfig compact_radio() {
  RadioConfig r;
  r.n_subcarriers = 16;
  r.channel_order = 16;
  return r;
}

}  // namespace radiobench
