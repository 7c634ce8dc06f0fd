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

#ifndef RADIOBENCH_TESTS_TEST_UTIL_HPP_
#define RADIOBENCH_TESTS_TEST_UTIL_HPP_

#include <random>
#include <vector>

#include <Eigen/Geometry>

#include "radiobench/geometry.hpp"
#include "radiobench/rng.hpp"

namespace radiobench::testing {

inline Mat3 random_rotation(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Vec3 random_point(Rng& rng, double half_width) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  return {u(rng), u(rng), u(rng)};
}

inline LocatorPose random_pose(Rng& rng) {
  return {random_point(rng, 10.0), random_rotation(rng)};
}

// Six locators on the perimeter of a 10 x 8 m hall at 1 m height, all
// facing the hall centre.
inline std::vector<LocatorPose> hall_locators(double height = 1.0) {
  const std::vector<Vec3> spots = {{0, 0, height},  {5, 0, height},
                                   {10, 0, height}, {10, 8, height},
                                   {5, 8, height},  {0, 8, height}};
  const Vec3 centre(5, 4, height);
  std::vector<LocatorPose> poses;
  for (const auto& s : spots) {
    poses.push_back({s, facing_orientation(centre - s)});
  }
  return poses;
}

}  // namespace radiobench::testing

#endif  // RADIOBENCH_TESTS_TEST_UTIL_HPP_
