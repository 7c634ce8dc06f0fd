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

#ifndef RADIOBENCH_DATASET_HPP_
#define RADIOBENCH_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "radiobench/channel_sim.hpp"
#include "radiobench/geometry.hpp"

namespace radiobench {

// Complex channel per (locator, antenna, subcarrier), row-major in that
// order.
struct CsiTensor {
  std::size_t n_locators = 0;
  std::size_t n_antennas = 0;
  std::size_t n_subcarriers = 0;
  ComplexVector values;

  std::size_t locator_size() const { return n_antennas * n_subcarriers; }
  std::span<const Complex> locator(std::size_t m) const {
    return std::span<const Complex>(values).subspan(m * locator_size(),
                                                    locator_size());
  }
  std::span<Complex> locator(std::size_t m) {
    return std::span<Complex>(values).subspan(m * locator_size(),
                                              locator_size());
  }
  bool operator==(const CsiTensor&) const = default;
};

// Periodogram per (locator, delay bin, angle bin), row-major.
struct PerTensor {
  std::size_t n_locators = 0;
  std::size_t n_delay = 0;
  std::size_t n_angle = 0;
  std::vector<double> values;

  std::size_t locator_size() const { return n_delay * n_angle; }
  std::span<const double> locator(std::size_t m) const {
    return std::span<const double>(values).subspan(m * locator_size(),
                                                   locator_size());
  }
  bool operator==(const PerTensor&) const = default;
};

struct Sample {
  Vec3 position = Vec3::Zero();
  CsiTensor csi;
  PerTensor per;
  std::vector<TaoaTriple> taoa;  // geometric labels, one per locator
  std::uint64_t time_index = 0;
};

bool operator==(const TaoaTriple& a, const TaoaTriple& b);
bool operator==(const Sample& a, const Sample& b);

struct Dataset {
  std::string name;
  SceneConfig scene;
  RadioConfig radio;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::size_t n_locators() const { return scene.locators.size(); }
  // Shapes agree, time indices strictly increase, positions inside bounds.
  void validate() const;
  // Copy holding only the listed samples, in the given order.
  Dataset subset(std::span<const std::size_t> indices) const;
};

bool operator==(const Dataset& a, const Dataset& b);

}  // namespace radiobench

#endif  // RADIOBENCH_DATASET_HPP_
