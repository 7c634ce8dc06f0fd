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

#ifndef RADIOBENCH_CONFIG_HPP_
#define RADIOBENCH_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "radiobench/channel_sim.hpp"

namespace radiobench {

using Json = nlohmann::json;

inline constexpr int kConfigSchema = 1;

// Everything simulate needs; see docs/config.md for the JSON layout.
struct SimulationConfig {
  SceneConfig scene;
  RadioConfig radio;
  Sampling sampling = GridSampling{};
  std::size_t n_samples = 1;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  std::optional<ShiftSpec> shift;
};

// Serialisers write every field explicitly so that parse(write(x)) == x
// bit for bit. Parsers throw ConfigError naming the offending field.
Json scene_to_json(const SceneConfig& scene);
SceneConfig scene_from_json(const Json& j);
Json radio_to_json(const RadioConfig& radio);
RadioConfig radio_from_json(const Json& j);
Json shift_to_json(const ShiftSpec& shift);
ShiftSpec shift_from_json(const Json& j);
Json sampling_to_json(const Sampling& sampling);
Sampling sampling_from_json(const Json& j);

Json simulation_to_json(const SimulationConfig& cfg);
// Requires "schema": 1. The scene may be a preset ({"preset": "hall", ...}).
SimulationConfig simulation_from_json(const Json& j);

std::string shift_kind_name(ShiftKind kind);
ShiftKind shift_kind_from_name(const std::string& name);

// Reads and parses a JSON file; IoError if unreadable, ConfigError if the
// text is not JSON.
Json read_json_file(const std::filesystem::path& path);

// Typed field access with field-path error messages.
namespace cfg {
const Json& field(const Json& j, const std::string& key, const std::string& where);
double number(const Json& j, const std::string& key, const std::string& where);
double number_or(const Json& j, const std::string& key, double fallback,
                 const std::string& where);
std::uint64_t uint_or(const Json& j, const std::string& key,
                      std::uint64_t fallback, const std::string& where);
int int_or(const Json& j, const std::string& key, int fallback,
           const std::string& where);
std::string string_or(const Json& j, const std::string& key,
                      const std::string& fallback, const std::string& where);
void require_schema(const Json& j);
}  // namespace cfg

}  // namespace radiobench

#endif  // RADIOBENCH_CONFIG_HPP_
