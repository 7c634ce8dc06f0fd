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

#include "radiobench/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "radiobench/errors.hpp"
#include "test_util.hpp"

namespace radiobench {
namespace {

using testing::hall_locators;
using testing::random_point;
using testing::random_pose;
using testing::random_rotation;

TEST(AnglesToUnitVector, AxisCases) {
  EXPECT_TRUE(angles_to_unit_vector(0, 0).isApprox(Vec3(1, 0, 0), 1e-15));
  const Vec3 y = angles_to_unit_vector(kPi / 2, 0);
  EXPECT_NEAR(y.x(), 0.0, 1e-15);
  EXPECT_NEAR(y.y(), 1.0, 1e-15);
  EXPECT_NEAR(y.z(), 0.0, 1e-15);
}

TEST(AnglesToUnitVector, MatchesLongDoubleEvaluation) {
  const long double az = 0.3L;
  const long double el = -0.2L;
  const long double ex = std::cos(el) * std::cos(az);
  const long double ey = std::cos(el) * std::sin(az);
  const long double ez = std::sin(el);
  const Vec3 u = angles_to_unit_vector(0.3, -0.2);
  EXPECT_NEAR(u.x(), static_cast<double>(ex), 1e-15);
  EXPECT_NEAR(u.y(), static_cast<double>(ey), 1e-15);
  EXPECT_NEAR(u.z(), static_cast<double>(ez), 1e-15);
  EXPECT_NEAR(u.norm(), 1.0, 1e-12);
}

TEST(AnglesToUnitVector, RejectsOutOfRange) {
  EXPECT_THROW(angles_to_unit_vector(4.0, 0.0), DomainError);
  EXPECT_THROW(angles_to_unit_vector(-kPi, 0.0), DomainError);
  EXPECT_THROW(angles_to_unit_vector(0.0, 1.6), DomainError);
  EXPECT_NO_THROW(angles_to_unit_vector(kPi, -kPi / 2));
}

TEST(TaoaToPosition, IdentityFrameAndZeroRange) {
  const LocatorPose origin;
  EXPECT_TRUE(taoa_to_position(origin, {0, 0, 5}).isApprox(Vec3(5, 0, 0)));
  Rng rng(7);
  const LocatorPose pose = random_pose(rng);
  EXPECT_EQ(taoa_to_position(pose, {0.4, 0.1, 0.0}), pose.position);
}

TEST(PositionToTaoa, AxisPoleAndRotatedFrame) {
  const LocatorPose origin;
  const TaoaTriple y = position_to_taoa(origin, {0, 3, 0});
  EXPECT_NEAR(y.azimuth, kPi / 2, 1e-15);
  EXPECT_EQ(y.elevation, 0.0);
  EXPECT_EQ(y.range, 3.0);

  const TaoaTriple pole = position_to_taoa(origin, {0, 0, 4});
  EXPECT_EQ(pole.azimuth, 0.0);
  EXPECT_EQ(pole.elevation, kPi / 2);
  EXPECT_EQ(pole.range, 4.0);

  // Local coordinates are Omega^T (x - p); for a 90 degree yaw the world
  // x axis lands on local -y.
  const LocatorPose yawed{Vec3::Zero(),
                          rotation_about_axis(Vec3::UnitZ(), kPi / 2)};
  const Vec3 local = yawed.orientation.transpose() * Vec3(5, 0, 0);
  const TaoaTriple t = position_to_taoa(yawed, {5, 0, 0});
  EXPECT_NEAR(t.azimuth, std::atan2(local.y(), local.x()), 1e-15);
  EXPECT_NEAR(t.azimuth, -kPi / 2, 1e-15);
  EXPECT_NEAR(t.range, 5.0, 1e-15);
}

TEST(PositionToTaoa, CoincidentPointIsDegenerate) {
  const LocatorPose pose{Vec3(1, 2, 3), Mat3::Identity()};
  EXPECT_THROW(position_to_taoa(pose, Vec3(1, 2, 3)), DegenerateGeometryError);
}

TEST(PositionToTaoa, AzimuthNeverMinusPi) {
  const TaoaTriple t = position_to_taoa(LocatorPose{}, Vec3(-2, -0.0, 0));
  EXPECT_EQ(t.azimuth, kPi);
}

TEST(GeometryProperty, RoundTripOverRandomPoses) {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const LocatorPose pose = random_pose(rng);
    const Vec3 user = random_point(rng, 20.0);
    const Vec3 back = taoa_to_position(pose, position_to_taoa(pose, user));
    ASSERT_LT((back - user).norm(), 1e-9) << "case " << i;
  }
}

TEST(GeometryProperty, FrameEquivariance) {
  Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    const LocatorPose pose = random_pose(rng);
    const Vec3 user = random_point(rng, 20.0);
    const Mat3 r = random_rotation(rng);
    const Vec3 t = random_point(rng, 5.0);
    const LocatorPose moved{r * pose.position + t, r * pose.orientation};
    const Vec3 moved_user = r * user + t;

    const TaoaTriple a = position_to_taoa(pose, user);
    const TaoaTriple b = position_to_taoa(moved, moved_user);
    ASSERT_NEAR(a.azimuth, b.azimuth, 1e-9);
    ASSERT_NEAR(a.elevation, b.elevation, 1e-9);
    ASSERT_NEAR(a.range, b.range, 1e-9);

    const TaoaTriple probe{0.7, -0.3, 4.0};
    const Vec3 p = taoa_to_position(pose, probe);
    const Vec3 q = taoa_to_position(moved, probe);
    ASSERT_LT((r * p + t - q).norm(), 1e-9);
  }
}

// --- likelihood --------------------------------------------------------

struct Scene {
  std::vector<LocatorPose> poses;
  std::vector<TaoaTriple> taoas;
};

Scene noiseless_scene(const Vec3& truth, double tau = 0.0) {
  Scene s;
  s.poses = hall_locators();
  for (const auto& p : s.poses) {
    TaoaTriple t = position_to_taoa(p, truth);
    t.range += tau * kSpeedOfLight;
    s.taoas.push_back(t);
  }
  return s;
}

TEST(JointLogLikelihood, MaximumAtTruth) {
  const Vec3 truth(3.2, 5.1, 1.0);
  const Scene s = noiseless_scene(truth);
  const MleConfig cfg = MleConfig::defaults(s.poses.size());
  const double at_truth = joint_log_likelihood(truth, 0.0, s.taoas, s.poses, cfg);
  for (int axis = 0; axis < 3; ++axis) {
    for (double sign : {-1.0, 1.0}) {
      Vec3 x = truth;
      x[axis] += sign * 0.1;
      EXPECT_GE(at_truth, joint_log_likelihood(x, 0.0, s.taoas, s.poses, cfg));
    }
  }
}

TEST(JointLogLikelihood, NullWeightsGiveZero) {
  const Scene s = noiseless_scene({4, 4, 1});
  MleConfig cfg = MleConfig::defaults(s.poses.size());
  std::fill(cfg.toa_weights.begin(), cfg.toa_weights.end(), 0.0);
  std::fill(cfg.aoa_concentrations.begin(), cfg.aoa_concentrations.end(), 0.0);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const Vec3 x = Vec3(5, 4, 1) + random_point(rng, 3.0);
    EXPECT_EQ(joint_log_likelihood(x, 1e-8 * i, s.taoas, s.poses, cfg), 0.0);
  }
}

TEST(JointLogLikelihood, TermByTermOracle) {
  // Three locators, hand-picked frames and measurements.
  const std::vector<LocatorPose> poses = {
      {Vec3(0, 0, 0), Mat3::Identity()},
      {Vec3(6, 0, 1), rotation_about_axis(Vec3::UnitZ(), kPi / 2)},
      {Vec3(3, 5, 2), rotation_about_axis(Vec3(1, 1, 0), 0.4)},
  };
  const std::vector<TaoaTriple> taoas = {
      {0.5, 0.1, 4.0}, {1.2, -0.05, 5.5}, {-2.0, 0.3, 3.0}};
  MleConfig cfg;
  cfg.toa_weights = {1.0, 0.5, 2.0};
  cfg.toa_sigmas = {0.3, 0.2, 0.5};
  cfg.aoa_concentrations = {10.0, 0.0, 3.0};
  const Vec3 x(2.0, 2.5, 0.5);
  const double tau = 2e-9;

  long double expected = 0.0L;
  for (std::size_t m = 0; m < 3; ++m) {
    const long double dx = x.x() - poses[m].position.x();
    const long double dy = x.y() - poses[m].position.y();
    const long double dz = x.z() - poses[m].position.z();
    const long double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
    const long double resid =
        taoas[m].range - dist - static_cast<long double>(tau) * kSpeedOfLight;
    const long double s = cfg.toa_sigmas[m];
    const long double gauss =
        std::exp(-resid * resid / (2 * s * s)) / std::sqrt(2 * 3.14159265358979323846L);
    expected += cfg.toa_weights[m] * std::log(gauss);
    // Omega^T (x - p) / |x - p| dotted with the measured unit vector.
    const Mat3& o = poses[m].orientation;
    const long double az = taoas[m].azimuth;
    const long double el = taoas[m].elevation;
    const long double u[3] = {std::cos(el) * std::cos(az),
                              std::cos(el) * std::sin(az), std::sin(el)};
    const long double d[3] = {dx / dist, dy / dist, dz / dist};
    long double dot = 0.0L;
    for (int i = 0; i < 3; ++i) {
      long double local = 0.0L;
      for (int j = 0; j < 3; ++j) local += o(j, i) * d[j];
      dot += u[i] * local;
    }
    expected += cfg.aoa_concentrations[m] * dot;
  }
  EXPECT_NEAR(joint_log_likelihood(x, tau, taoas, poses, cfg),
              static_cast<double>(expected), 1e-11);
}

TEST(JointLogLikelihood, SimplifiedMatchesLiteralForm) {
  Rng rng(5);
  const Scene s = noiseless_scene({4.0, 3.0, 1.0});
  const MleConfig cfg = MleConfig::defaults(s.poses.size(), 0.5);
  for (int i = 0; i < 200; ++i) {
    const Vec3 x = Vec3(5, 4, 1) + random_point(rng, 1.0);
    const double tau = 1e-9 * (i % 5);
    EXPECT_NEAR(joint_log_likelihood(x, tau, s.taoas, s.poses, cfg),
                joint_log_likelihood_unsimplified(x, tau, s.taoas, s.poses, cfg),
                1e-10);
  }
}

TEST(JointLogLikelihood, TransmitTimeGauge) {
  Rng rng(9);
  const Scene s = noiseless_scene({6.0, 2.0, 1.0});
  const MleConfig cfg = MleConfig::defaults(s.poses.size(), 0.3);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x = Vec3(5, 4, 1) + random_point(rng, 2.0);
    const double tau = 1e-8 * std::uniform_real_distribution<>(-1, 1)(rng);
    const double delta = 5e-8 * std::uniform_real_distribution<>(0, 1)(rng);
    auto shifted = s.taoas;
    for (auto& t : shifted) t.range += delta * kSpeedOfLight;
    const double a = joint_log_likelihood(x, tau, s.taoas, s.poses, cfg);
    const double b = joint_log_likelihood(x, tau + delta, shifted, s.poses, cfg);
    EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, std::abs(a)));
  }
}

TEST(JointLogLikelihood, DegenerateAndShapeErrors) {
  const Scene s = noiseless_scene({4, 4, 1});
  const MleConfig cfg = MleConfig::defaults(s.poses.size());
  EXPECT_THROW(joint_log_likelihood(s.poses[0].position, 0, s.taoas, s.poses, cfg),
               DegenerateGeometryError);
  const std::vector<TaoaTriple> short_taoas(s.taoas.begin(), s.taoas.end() - 1);
  EXPECT_THROW(joint_log_likelihood({1, 1, 1}, 0, short_taoas, s.poses, cfg),
               ShapeError);
}

// --- estimator ---------------------------------------------------------

TEST(JointMle, NoiselessRecovery) {
  const Vec3 truth(3.7, 2.2, 1.0);
  const Scene s = noiseless_scene(truth);
  const PositionEstimate est =
      joint_mle_estimate(s.taoas, s.poses, MleConfig::defaults(6));
  EXPECT_LT((est.position - truth).norm(), 1e-6);
  EXPECT_LT(std::abs(est.transmit_time), 1e-12);
  EXPECT_EQ(est.log_likelihood,
            joint_log_likelihood(est.position, est.transmit_time, s.taoas,
                                 s.poses, MleConfig::defaults(6)));
}

TEST(JointMle, RecoversInjectedTransmitTime) {
  const Vec3 truth(7.1, 5.4, 1.0);
  const double tau = 10e-9;
  const Scene s = noiseless_scene(truth, tau);
  const PositionEstimate est =
      joint_mle_estimate(s.taoas, s.poses, MleConfig::defaults(6));
  EXPECT_LT((est.position - truth).norm(), 1e-6);
  EXPECT_NEAR(est.transmit_time, tau, 1e-11);
}

// A large clock offset with the user well above the locator plane; starts
// at tau = 0 used to settle in the mirror basin below the plane.
TEST(JointMle, RecoversLargeTransmitTimeOffPlane) {
  const Vec3 truth(6.23, 5.38, 2.39);
  const double tau = 100e-9;
  const Scene s = noiseless_scene(truth, tau);
  const PositionEstimate est =
      joint_mle_estimate(s.taoas, s.poses, MleConfig::defaults(6));
  EXPECT_LT((est.position - truth).norm(), 1e-6);
  EXPECT_NEAR(est.transmit_time, tau, 1e-11);
}

TEST(JointMle, RejectsSingleLocator) {
  const Scene s = noiseless_scene({4, 4, 1});
  EXPECT_THROW(joint_mle_estimate(std::span(s.taoas).first(1),
                                  std::span(s.poses).first(1),
                                  MleConfig::defaults(1)),
               ConfigError);
}

TEST(JointMle, NonFiniteInputIsOptimisationError) {
  Scene s = noiseless_scene({4, 4, 1});
  s.taoas[2].range = std::nan("");
  EXPECT_THROW(joint_mle_estimate(s.taoas, s.poses, MleConfig::defaults(6)),
               OptimisationError);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> monte_carlo_errors(std::size_t n_locators, int trials,
                                       double sigma, std::uint64_t seed,
                                       double kappa = 50.0) {
  const auto all = hall_locators();
  const std::vector<LocatorPose> poses(all.begin(), all.begin() + n_locators);
  std::vector<double> errors;
  Rng rng(seed);
  std::uniform_real_distribution<double> ux(1.0, 9.0), uy(1.0, 7.0);
  std::normal_distribution<double> noise(0.0, sigma);
  MleConfig cfg = MleConfig::defaults(n_locators, sigma, kappa);
  cfg.search_box = Box{Vec3(0, 0, 0), Vec3(10, 8, 2)};
  for (int t = 0; t < trials; ++t) {
    const Vec3 truth(ux(rng), uy(rng), 1.0);
    std::vector<TaoaTriple> taoas;
    for (const auto& p : poses) {
      TaoaTriple tr = position_to_taoa(p, truth);
      tr.range = std::max(0.0, tr.range + noise(rng));
      taoas.push_back(tr);
    }
    errors.push_back(
        (joint_mle_estimate(taoas, poses, cfg).position - truth).norm());
  }
  return errors;
}

TEST(JointMle, MonteCarloRangeNoise) {
  // Angles are exact here, so they get a high concentration. With the
  // default kappa the coplanar layout leaves height poorly constrained.
  EXPECT_LT(median(monte_carlo_errors(6, 500, 0.05, 21, 1e4)), 0.05);
}

TEST(JointMle, ErrorNonIncreasingInLocatorCount) {
  const double three = median(monte_carlo_errors(3, 200, 0.1, 31));
  const double six = median(monte_carlo_errors(6, 200, 0.1, 31));
  EXPECT_LE(six, three);
}

TEST(JointMle, ParallelRestartsMatchSerial) {
  const Scene s = noiseless_scene({2.5, 6.5, 1.0}, 3e-9);
  MleConfig serial = MleConfig::defaults(6);
  serial.restarts = 6;
  MleConfig parallel = serial;
  parallel.exec = par::Exec::kParallel;
  const auto a = joint_mle_estimate(s.taoas, s.poses, serial);
  const auto b = joint_mle_estimate(s.taoas, s.poses, parallel);
  EXPECT_EQ(a.position, b.position);
  EXPECT_EQ(a.transmit_time, b.transmit_time);
}

}  // namespace
}  // namespace radiobench
