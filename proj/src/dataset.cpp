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

#include "radiobench/dataset.hpp"

#include <string>

#include "radiobench/errors.hpp"

namespace radiobench {
namespace {

bool same_scene(const SceneConfig& a, const SceneConfig& b) {
  if (a.locators.size() != b.locators.size() ||
      a.scatterers.size() != b.scatterers.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.locators.size(); ++i) {
    if (a.locators[i].position != b.locators[i].position ||
        a.locators[i].orientation != b.locators[i].orientation) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.scatterers.size(); ++i) {
    if (a.scatterers[i].position != b.scatterers[i].position ||
        a.scatterers[i].reflectivity != b.scatterers[i].reflectivity) {
      return false;
    }
  }
  return a.bounds.lo == b.bounds.lo && a.bounds.hi == b.bounds.hi &&
         a.pathloss_exponent == b.pathloss_exponent && a.seed == b.seed;
}

}  // namespace

bool operator==(const TaoaTriple& a, const TaoaTriple& b) {
  return a.azimuth == b.azimuth && a.elevation == b.elevation &&
         a.range == b.range;
}

bool operator==(const Sample& a, const Sample& b) {
  return a.position == b.position && a.csi == b.csi && a.per == b.per &&
         a.taoa == b.taoa && a.time_index == b.time_index;
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.name == b.name && same_scene(a.scene, b.scene) &&
         a.radio == b.radio && a.samples == b.samples;
}

void Dataset::validate() const {
  const std::size_t n_loc = n_locators();
  const auto n_ant = static_cast<std::size_t>(radio.n_antennas);
  const auto n_sub = static_cast<std::size_t>(radio.n_subcarriers);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    const std::string where = "sample " + std::to_string(i) + ": ";
    if (s.csi.n_locators != n_loc || s.csi.n_antennas != n_ant ||
        s.csi.n_subcarriers != n_sub ||
        s.csi.values.size() != n_loc * n_ant * n_sub) {
      throw ShapeError(where + "CSI shape does not match the radio config");
    }
    if (s.per.n_locators != n_loc ||
        s.per.n_delay != static_cast<std::size_t>(radio.delay_bins()) ||
        s.per.n_angle != static_cast<std::size_t>(radio.angle_bins()) ||
        s.per.values.size() != n_loc * s.per.locator_size()) {
      throw ShapeError(where + "periodogram shape does not match");
    }
    if (s.taoa.size() != n_loc) {
      throw ShapeError(where + "expected one TAoA label per locator");
    }
    if (!scene.bounds.contains(s.position)) {
      throw DomainError(where + "position outside scene bounds");
    }
    if (i > 0 && !(s.time_index > samples[i - 1].time_index)) {
      throw DomainError(where + "time indices must strictly increase");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.name = name;
  out.scene = scene;
  out.radio = radio;
  out.samples.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= samples.size()) {
      throw DomainError("subset index " + std::to_string(i) + " out of range");
    }
    out.samples.push_back(samples[i]);
  }
  return out;
}

}  // namespace radiobench
