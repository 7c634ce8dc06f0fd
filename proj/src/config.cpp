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

#include "radiobench/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "radiobench/errors.hpp"

namespace radiobench {
namespace cfg {

namespace {
std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}
}  // namespace

const Json& field(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing field '" + join(where, key) + "'");
  return *it;
}

namespace {
double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError("field '" + path + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("field '" + path + "' must be finite");
  return x;
}
}  // namespace

double number(const Json& j, const std::string& key, const std::string& where) {
  return as_number(field(j, key, where), join(where, key));
}

double number_or(const Json& j, const std::string& key, double fallback,
                 const std::string& where) {
  if (!j.contains(key)) return fallback;
  return number(j, key, where);
}

std::uint64_t uint_or(const Json& j, const std::string& key,
                      std::uint64_t fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError("field '" + join(where, key) +
                      "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

int int_or(const Json& j, const std::string& key, int fallback,
           const std::string& where) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError("field '" + join(where, key) + "' must be an integer");
  }
  const auto x = v.get<std::int64_t>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError("field '" + join(where, key) + "' is out of range");
  }
  return static_cast<int>(x);
}

std::string string_or(const Json& j, const std::string& key,
                      const std::string& fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_string()) {
    throw ConfigError("field '" + join(where, key) + "' must be a string");
  }
  return v.get<std::string>();
}

void require_schema(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (!j.contains("schema")) throw ConfigError("missing field 'schema'");
  if (!j.at("schema").is_number_integer() ||
      j.at("schema").get<std::int64_t>() != kConfigSchema) {
    throw ConfigError("field 'schema' must be " + std::to_string(kConfigSchema));
  }
}

}  // namespace cfg

namespace {

using cfg::field;
using cfg::number;
using cfg::number_or;

Json vec_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError("field '" + path + "' must be an array of 3 numbers");
  }
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) {
      throw ConfigError("field '" + path + "' must be an array of 3 numbers");
    }
    v[i] = j[i].get<double>();
  }
  if (!v.allFinite()) throw ConfigError("field '" + path + "' must be finite");
  return v;
}

}  // namespace

std::string shift_kind_name(ShiftKind kind) {
  switch (kind) {
    case ShiftKind::kMacroEnvironment: return "macro_environment";
    case ShiftKind::kMicroLocator: return "micro_locator";
    case ShiftKind::kMicroScattering: return "micro_scattering";
  }
  return "unknown";
}

ShiftKind shift_kind_from_name(const std::string& name) {
  if (name == "macro_environment") return ShiftKind::kMacroEnvironment;
  if (name == "micro_locator") return ShiftKind::kMicroLocator;
  if (name == "micro_scattering") return ShiftKind::kMicroScattering;
  throw ConfigError("field 'shift.kind' must be one of macro_environment, "
                    "micro_locator, micro_scattering (got '" + name + "')");
}

Json scene_to_json(const SceneConfig& scene) {
  Json locs = Json::array();
  for (const auto& l : scene.locators) {
    Json rows = Json::array();
    for (int r = 0; r < 3; ++r) {
      rows.push_back(Json::array(
          {l.orientation(r, 0), l.orientation(r, 1), l.orientation(r, 2)}));
    }
    locs.push_back({{"position", vec_to_json(l.position)}, {"orientation", rows}});
  }
  Json scat = Json::array();
  for (const auto& s : scene.scatterers) {
    scat.push_back({{"position", vec_to_json(s.position)},
                    {"reflectivity", s.reflectivity}});
  }
  return {{"locators", locs},
          {"bounds", {{"lo", vec_to_json(scene.bounds.lo)},
                      {"hi", vec_to_json(scene.bounds.hi)}}},
          {"scatterers", scat},
          {"pathloss_exponent", scene.pathloss_exponent},
          {"seed", scene.seed}};
}

SceneConfig scene_from_json(const Json& j) {
  const std::string where = "scene";
  if (!j.is_object()) throw ConfigError("field 'scene' must be an object");
  SceneConfig scene;
  const std::string preset = cfg::string_or(j, "preset", "", where);
  if (!preset.empty()) {
    if (preset != "hall") {
      throw ConfigError("field 'scene.preset' must be 'hall' (got '" + preset + "')");
    }
    const int n = cfg::int_or(j, "n_scatterers", 0, where);
    if (n < 0) throw ConfigError("field 'scene.n_scatterers' must be >= 0");
    scene = hall_scene(static_cast<std::size_t>(n),
                       number_or(j, "reflectivity", 0.5, where),
                       cfg::uint_or(j, "seed", 0, where),
                       number_or(j, "height_m", 1.0, where));
    scene.pathloss_exponent =
        number_or(j, "pathloss_exponent", scene.pathloss_exponent, where);
  } else {
    const Json& locs = field(j, "locators", where);
    if (!locs.is_array()) throw ConfigError("field 'scene.locators' must be an array");
    for (std::size_t i = 0; i < locs.size(); ++i) {
      const std::string p = "scene.locators[" + std::to_string(i) + "]";
      LocatorPose pose;
      pose.position = vec_from_json(field(locs[i], "position", p), p + ".position");
      if (locs[i].contains("facing")) {
        const Vec3 target = vec_from_json(locs[i].at("facing"), p + ".facing");
        try {
          pose.orientation = facing_orientation(target - pose.position);
        } catch (const Error&) {
          throw ConfigError("field '" + p + ".facing' has no horizontal offset");
        }
      } else {
        const Json& rows = field(locs[i], "orientation", p);
        if (!rows.is_array() || rows.size() != 3) {
          throw ConfigError("field '" + p + ".orientation' must be 3 rows");
        }
        for (int r = 0; r < 3; ++r) {
          pose.orientation.row(r) =
              vec_from_json(rows[r], p + ".orientation").transpose();
        }
      }
      if (!pose.is_valid()) {
        throw ConfigError("field '" + p +
                          ".orientation' must be a rotation (orthonormal, det +1)");
      }
      scene.locators.push_back(pose);
    }
    const Json& bounds = field(j, "bounds", where);
    scene.bounds.lo = vec_from_json(field(bounds, "lo", "scene.bounds"), "scene.bounds.lo");
    scene.bounds.hi = vec_from_json(field(bounds, "hi", "scene.bounds"), "scene.bounds.hi");
    if (j.contains("scatterers")) {
      const Json& sc = j.at("scatterers");
      if (!sc.is_array()) throw ConfigError("field 'scene.scatterers' must be an array");
      for (std::size_t i = 0; i < sc.size(); ++i) {
        const std::string p = "scene.scatterers[" + std::to_string(i) + "]";
        scene.scatterers.push_back(
            {vec_from_json(field(sc[i], "position", p), p + ".position"),
             number(sc[i], "reflectivity", p)});
      }
    }
    scene.pathloss_exponent = number_or(j, "pathloss_exponent", 2.0, where);
    scene.seed = cfg::uint_or(j, "seed", 0, where);
  }
  if (!(scene.pathloss_exponent > 0.0)) {
    throw ConfigError("field 'scene.pathloss_exponent' must be > 0");
  }
  try {
    scene.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(std::string("scene.bounds: ") + e.what());
  }
  return scene;
}

Json radio_to_json(const RadioConfig& r) {
  return {{"carrier_hz", r.carrier_hz},
          {"bandwidth_hz", r.bandwidth_hz},
          {"n_subcarriers", r.n_subcarriers},
          {"n_antennas", r.n_antennas},
          {"channel_order", r.channel_order},
          {"antenna_spacing_wavelengths", r.antenna_spacing_wavelengths}};
}

RadioConfig radio_from_json(const Json& j) {
  const std::string where = "radio";
  if (!j.is_object()) throw ConfigError("field 'radio' must be an object");
  RadioConfig r;
  if (cfg::string_or(j, "preset", "", where) == "compact") r = compact_radio();
  r.carrier_hz = number_or(j, "carrier_hz", r.carrier_hz, where);
  r.bandwidth_hz = number_or(j, "bandwidth_hz", r.bandwidth_hz, where);
  r.n_subcarriers = cfg::int_or(j, "n_subcarriers", r.n_subcarriers, where);
  r.n_antennas = cfg::int_or(j, "n_antennas", r.n_antennas, where);
  r.channel_order = cfg::int_or(j, "channel_order", r.channel_order, where);
  r.antenna_spacing_wavelengths = number_or(
      j, "antenna_spacing_wavelengths", r.antenna_spacing_wavelengths, where);
  try {
    r.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("radio.") + e.what());
  }
  return r;
}

Json shift_to_json(const ShiftSpec& s) {
  return {{"kind", shift_kind_name(s.kind)},
          {"magnitude", s.magnitude},
          {"seed", s.seed}};
}

ShiftSpec shift_from_json(const Json& j) {
  const std::string where = "shift";
  if (!j.is_object()) throw ConfigError("field 'shift' must be an object");
  ShiftSpec s;
  s.kind = shift_kind_from_name(cfg::string_or(j, "kind", "", where));
  s.magnitude = number(j, "magnitude", where);
  if (s.magnitude < 0.0) throw ConfigError("field 'shift.magnitude' must be >= 0");
  s.seed = cfg::uint_or(j, "seed", 0, where);
  return s;
}

Json sampling_to_json(const Sampling& sampling) {
  if (const auto* g = std::get_if<GridSampling>(&sampling)) {
    return {{"mode", "grid"}, {"pitch_m", g->pitch_m},
            {"height_m", g->height_m}, {"margin_m", g->margin_m}};
  }
  if (const auto* c = std::get_if<CircleTrajectory>(&sampling)) {
    return {{"mode", "circle"}, {"centre", vec_to_json(c->centre)},
            {"radius_m", c->radius_m}, {"turns", c->turns}, {"phase", c->phase}};
  }
  const auto& u = std::get<UniformSampling>(sampling);
  return {{"mode", "uniform"}, {"height_m", u.height_m}, {"margin_m", u.margin_m}};
}

Sampling sampling_from_json(const Json& j) {
  const std::string where = "sampling";
  if (!j.is_object()) throw ConfigError("field 'sampling' must be an object");
  const std::string mode = cfg::string_or(j, "mode", "grid", where);
  if (mode == "grid") {
    GridSampling g;
    g.pitch_m = number_or(j, "pitch_m", g.pitch_m, where);
    g.height_m = number_or(j, "height_m", g.height_m, where);
    g.margin_m = number_or(j, "margin_m", g.margin_m, where);
    if (!(g.pitch_m > 0.0)) throw ConfigError("field 'sampling.pitch_m' must be > 0");
    if (g.margin_m < 0.0) throw ConfigError("field 'sampling.margin_m' must be >= 0");
    return g;
  }
  if (mode == "circle") {
    CircleTrajectory c;
    c.centre = vec_from_json(field(j, "centre", where), "sampling.centre");
    c.radius_m = number(j, "radius_m", where);
    c.turns = number_or(j, "turns", c.turns, where);
    c.phase = number_or(j, "phase", c.phase, where);
    if (!(c.radius_m > 0.0)) throw ConfigError("field 'sampling.radius_m' must be > 0");
    return c;
  }
  if (mode == "uniform") {
    UniformSampling u;
    u.height_m = number_or(j, "height_m", u.height_m, where);
    u.margin_m = number_or(j, "margin_m", u.margin_m, where);
    if (u.margin_m < 0.0) throw ConfigError("field 'sampling.margin_m' must be >= 0");
    return u;
  }
  throw ConfigError("field 'sampling.mode' must be grid, circle or uniform (got '" +
                    mode + "')");
}

Json simulation_to_json(const SimulationConfig& c) {
  Json j = {{"schema", kConfigSchema},
            {"scene", scene_to_json(c.scene)},
            {"radio", radio_to_json(c.radio)},
            {"sampling", sampling_to_json(c.sampling)},
            {"n_samples", c.n_samples},
            {"noise_std", c.noise_std},
            {"seed", c.seed}};
  if (c.shift) j["shift"] = shift_to_json(*c.shift);
  return j;
}

SimulationConfig simulation_from_json(const Json& j) {
  cfg::require_schema(j);
  SimulationConfig c;
  c.scene = scene_from_json(field(j, "scene", ""));
  c.radio = j.contains("radio") ? radio_from_json(j.at("radio")) : RadioConfig{};
  if (j.contains("sampling")) c.sampling = sampling_from_json(j.at("sampling"));
  c.n_samples = cfg::uint_or(j, "n_samples", 1, "");
  if (c.n_samples < 1) throw ConfigError("field 'n_samples' must be >= 1");
  c.noise_std = number_or(j, "noise_std", 0.0, "");
  if (c.noise_std < 0.0) throw ConfigError("field 'noise_std' must be >= 0");
  c.seed = cfg::uint_or(j, "seed", 0, "");
  if (j.contains("shift")) c.shift = shift_from_json(j.at("shift"));
  return c;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace radiobench
