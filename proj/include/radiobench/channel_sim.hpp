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

#ifndef RADIOBENCH_CHANNEL_SIM_HPP_
#define RADIOBENCH_CHANNEL_SIM_HPP_

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "radiobench/geometry.hpp"
#include "radiobench/parallel.hpp"

namespace radiobench {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

// One ray of the baseband channel model.
struct PathComponent {
  double attenuation = 0.0;  // >= 0
  double phase = 0.0;        // radians
  double delay = 0.0;        // seconds, >= 0
  int path_index = 0;        // 0 is line of sight
  int cluster_index = 0;
};

struct RadioConfig {
  double carrier_hz = 3.75e9;
  double bandwidth_hz = 100e6;
  int n_subcarriers = 64;
  int n_antennas = 4;
  int channel_order = 32;
  double antenna_spacing_wavelengths = 0.5;

  double sample_period() const { return 1.0 / bandwidth_hz; }
  double wavelength() const { return kSpeedOfLight / carrier_hz; }
  // Angle axis of the periodogram is zero-padded 4x.
  int angle_bins() const { return 4 * n_antennas; }
  int delay_bins() const { return n_subcarriers; }
  void validate() const;

  bool operator==(const RadioConfig&) const = default;
};

struct Scatterer {
  Vec3 position = Vec3::Zero();
  double reflectivity = 0.5;  // [0, 1]
};

struct SceneConfig {
  std::vector<LocatorPose> locators;
  Box bounds;
  std::vector<Scatterer> scatterers;
  double pathloss_exponent = 2.0;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class ShiftKind { kMacroEnvironment, kMicroLocator, kMicroScattering };

struct ShiftSpec {
  ShiftKind kind = ShiftKind::kMacroEnvironment;
  double magnitude = 0.0;
  std::uint64_t seed = 0;
};

// h(k) = sum_p a_p exp(j(2 pi f_c tau_p + phi_p)) sinc(k - tau_p / T_s),
// k = 0..O-1.
ComplexVector synthesize_cir(std::span<const PathComponent> paths,
                             const RadioConfig& radio);

// Geometric ray set seen by each antenna of one locator: the LOS ray plus
// one first-order bounce per scatterer. Antennas form a uniform linear array
// along the locator's local y axis with azimuth-only steering.
std::vector<std::vector<PathComponent>> scene_to_paths(
    const SceneConfig& scene, std::size_t locator_idx, const Vec3& user,
    const RadioConfig& radio);

// H[s] = sum_k h(k) exp(-j 2 pi s k / N) for each antenna; no 1/N factor.
std::vector<ComplexVector> cir_to_csi(std::span<const ComplexVector> cirs,
                                      const RadioConfig& radio);

// Inverse of cir_to_csi for one antenna (recovers the first `taps` taps).
ComplexVector csi_to_cir(std::span<const Complex> csi, std::size_t taps);

// Delay x angle periodogram of one locator's CSI, laid out antenna-major
// (csi[b * n_subcarriers + s]). Rows are delay bins (tap index, spacing
// T_s), columns are spatial-frequency bins u = q / Q wrapped to [-1/2, 1/2).
// Sum of entries equals n_subcarriers * angle_bins * |csi|^2.
Eigen::MatrixXd csi_to_periodogram(std::span<const Complex> csi,
                                   int n_antennas, int n_subcarriers,
                                   int angle_bins);

// Spatial frequency of angle bin q.
double angle_bin_frequency(int q, int angle_bins);
// Angle bin holding spatial frequency u (nearest, wrapped).
int nearest_angle_bin(double spatial_frequency, int angle_bins);
// Spatial frequency spacing * sin(azimuth) used by the array model.
double steering_frequency(double azimuth, const RadioConfig& radio);

// --- sampling -------------------------------------------------------------

// Regular xy grid at `pitch_m`, inset by `margin_m` from the bounds, at a
// fixed height. Sample i visits grid point i mod G.
struct GridSampling {
  double pitch_m = 0.5;
  double height_m = 1.0;
  double margin_m = 0.0;
};

// Temporally ordered positions on a circle; sample i sits at angle
// phase + 2 pi turns i / n.
struct CircleTrajectory {
  Vec3 centre = Vec3::Zero();
  double radius_m = 1.0;
  double turns = 1.0;
  double phase = 0.0;
};

// Independent uniform positions in the inset xy bounds at a fixed height.
struct UniformSampling {
  double height_m = 1.0;
  double margin_m = 0.5;
};

using Sampling = std::variant<GridSampling, CircleTrajectory, UniformSampling>;

std::vector<Vec3> grid_points(const Box& bounds, const GridSampling& grid);

struct Dataset;

// Deterministic given (scene, radio, sampling, seed); per-sample noise
// streams are keyed by sample index.
Dataset simulate_dataset(const SceneConfig& scene, const RadioConfig& radio,
                         const Sampling& sampling, std::size_t n_samples,
                         double noise_std, std::uint64_t seed,
                         par::Exec exec = par::Exec::kParallel);

// Returns the scene with the shift applied; magnitude 0 returns it unchanged.
SceneConfig apply_shift(const SceneConfig& scene, const ShiftSpec& spec);

// Desk-scale reference scene: a 10 x 8 m hall, six locators on the
// perimeter at `height_m` facing the hall centre, `n_scatterers` random
// scatterers.
SceneConfig hall_scene(std::size_t n_scatterers, double reflectivity,
                       std::uint64_t seed, double height_m = 1.0);

// Smaller radio used for learnt-model experiments: 16 subcarriers,
// channel order 16.
RadioConfig compact_radio();

}  // namespace radiobench

#endif  // RADIOBENCH_CHANNEL_SIM_HPP_
