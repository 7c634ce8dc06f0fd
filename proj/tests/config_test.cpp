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

#include <string>

#include <gtest/gtest.h>

#include "radiobench/dataset.hpp"
#include "radiobench/errors.hpp"

namespace radiobench {
namespace {

Json minimal() {
  return Json::parse(R"({
    "schema": 1,
    "scene": {"preset": "hall", "n_scatterers": 3, "seed": 2},
    "radio": {"preset": "compact"},
    "sampling": {"mode": "grid", "pitch_m": 1.0, "margin_m": 0.5},
    "n_samples": 10,
    "seed": 5
  })");
}

std::string message_of(const Json& j) {
  try {
    simulation_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, MinimalConfigParses) {
  const SimulationConfig c = simulation_from_json(minimal());
  EXPECT_EQ(c.scene.locators.size(), 6u);
  EXPECT_EQ(c.scene.scatterers.size(), 3u);
  EXPECT_EQ(c.radio, compact_radio());
  EXPECT_EQ(c.n_samples, 10u);
  EXPECT_EQ(std::get<GridSampling>(c.sampling).pitch_m, 1.0);
  EXPECT_FALSE(c.shift.has_value());
}

TEST(Config, WriteThenParseIsIdentity) {
  SimulationConfig c = simulation_from_json(minimal());
  c.shift = ShiftSpec{ShiftKind::kMicroLocator, 0.25, 9};
  c.scene = apply_shift(c.scene, *c.shift);
  c.sampling = CircleTrajectory{Vec3(5, 4, 1), 2.5, 1.5, 0.3};
  const Json j = simulation_to_json(c);
  const SimulationConfig back = simulation_from_json(Json::parse(j.dump()));
  Dataset a, b;
  a.scene = c.scene;
  b.scene = back.scene;
  EXPECT_TRUE(a == b);
  EXPECT_EQ(back.radio, c.radio);
  EXPECT_EQ(simulation_to_json(back), j);
}

TEST(Config, SchemaIsRequired) {
  Json j = minimal();
  j.erase("schema");
  EXPECT_NE(message_of(j).find("schema"), std::string::npos);
  j["schema"] = 2;
  EXPECT_NE(message_of(j).find("schema"), std::string::npos);
}

TEST(Config, ErrorsNameTheField) {
  Json j = minimal();
  j["scene"]["pathloss_exponent"] = 0.0;
  EXPECT_NE(message_of(j).find("pathloss_exponent"), std::string::npos);
  j = minimal();
  j["radio"]["n_subcarriers"] = 1;
  EXPECT_NE(message_of(j).find("n_subcarriers"), std::string::npos);
  j = minimal();
  j["sampling"]["mode"] = "spiral";
  EXPECT_NE(message_of(j).find("sampling.mode"), std::string::npos);
  j = minimal();
  j["n_samples"] = "ten";
  EXPECT_NE(message_of(j).find("n_samples"), std::string::npos);
  j = minimal();
  j["shift"] = {{"kind", "tilt"}, {"magnitude", 1.0}};
  EXPECT_NE(message_of(j).find("shift.kind"), std::string::npos);
}

TEST(Config, ExplicitSceneWithFacingLocators) {
  const Json j = Json::parse(R"({
    "locators": [{"position": [0, 0, 1], "facing": [4, 4, 1]},
                 {"position": [8, 0, 1], "orientation": [[1,0,0],[0,1,0],[0,0,1]]}],
    "bounds": {"lo": [0, 0, 0], "hi": [8, 8, 3]},
    "scatterers": [{"position": [2, 6, 1], "reflectivity": 0.4}],
    "pathloss_exponent": 2.2
  })");
  const SceneConfig s = scene_from_json(j);
  EXPECT_EQ(s.locators.size(), 2u);
  EXPECT_TRUE(s.locators[0].is_valid());
  EXPECT_EQ(s.pathloss_exponent, 2.2);
  Json bad = j;
  bad["locators"][1]["orientation"] = Json::parse("[[2,0,0],[0,1,0],[0,0,1]]");
  EXPECT_THROW(scene_from_json(bad), ConfigError);
  bad = j;
  bad["scatterers"][0]["reflectivity"] = 1.5;
  EXPECT_THROW(scene_from_json(bad), ConfigError);
}

}  // namespace
}  // namespace radiobench
