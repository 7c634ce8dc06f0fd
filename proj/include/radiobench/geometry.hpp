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

#ifndef RADIOBENCH_GEOMETRY_HPP_
#define RADIOBENCH_GEOMETRY_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "radiobench/parallel.hpp"

namespace radiobench {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

// Axis-aligned box in metres.
struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();

  bool contains(const Vec3& p, double slack = 0.0) const;
  Vec3 extent() const { return hi - lo; }
  Vec3 centre() const { return 0.5 * (lo + hi); }
  // Throws ConfigError unless hi > lo on every axis.
  void validate() const;
};

// Known pose of a locator. `orientation` maps locator-local coordinates to
// the world frame; its columns are the local x (boresight), y (array axis)
// and z axes.
struct LocatorPose {
  Vec3 position = Vec3::Zero();
  Mat3 orientation = Mat3::Identity();

  // Orthonormal and right-handed within 1e-9 per entry.
  bool is_valid() const;
  void validate() const;
};

// Azimuth/elevation in the locator frame plus range.
struct TaoaTriple {
  double azimuth = 0.0;    // (-pi, pi]
  double elevation = 0.0;  // [-pi/2, pi/2]
  double range = 0.0;      // metres, >= 0

  void validate() const;
};

struct MleConfig {
  std::vector<double> toa_weights;
  std::vector<double> toa_sigmas;
  std::vector<double> aoa_concentrations;
  double speed_of_light = kSpeedOfLight;
  int restarts = 4;
  int max_iters = 4000;
  double tol = 1e-11;
  // Region seeded by the 8x8x2 start grid. Defaults to the locators'
  // bounding box padded by 1 m.
  std::optional<Box> search_box;
  par::Exec exec = par::Exec::kSerial;

  // w = 1/sigma^2 and kappa = 50 for every locator.
  static MleConfig defaults(std::size_t n_locators, double sigma_m = 0.1,
                            double kappa = 50.0);
  void validate(std::size_t n_locators) const;
};

struct PositionEstimate {
  Vec3 position = Vec3::Zero();
  double transmit_time = 0.0;  // seconds
  double log_likelihood = 0.0;
};

Vec3 angles_to_unit_vector(double azimuth, double elevation);

Vec3 taoa_to_position(const LocatorPose& pose, const TaoaTriple& taoa);

// Azimuth is 0 at the poles (elevation = +-pi/2).
TaoaTriple position_to_taoa(const LocatorPose& pose, const Vec3& user);

// Joint ToA/AoA log-likelihood of user position `x` and transmit time `tau`
// (seconds). Gaussian range terms use the simplified log form.
double joint_log_likelihood(const Vec3& x, double tau,
                            std::span<const TaoaTriple> taoas,
                            std::span<const LocatorPose> poses,
                            const MleConfig& cfg);

// Same value with the Gaussian density exponentiated then logged, term by
// term, as the likelihood is usually written. Only meaningful while the
// exponentials do not underflow; kept as a cross-check.
double joint_log_likelihood_unsimplified(const Vec3& x, double tau,
                                         std::span<const TaoaTriple> taoas,
                                         std::span<const LocatorPose> poses,
                                         const MleConfig& cfg);

// Multi-start Nelder-Mead maximisation of joint_log_likelihood over
// (x, y, z, tau).
PositionEstimate joint_mle_estimate(std::span<const TaoaTriple> taoas,
                                    std::span<const LocatorPose> poses,
                                    const MleConfig& cfg);

// Helpers for building scenes.
Mat3 rotation_about_axis(const Vec3& axis, double angle);
// Level frame whose boresight points along the horizontal projection of
// `forward`.
Mat3 facing_orientation(const Vec3& forward);

}  // namespace radiobench

#endif  // RADIOBENCH_GEOMETRY_HPP_
