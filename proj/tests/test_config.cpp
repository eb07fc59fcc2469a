// Copyright 2026 The hsc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <stdexcept>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "hsc/config.hpp"

using namespace hsc;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parses every value type") {
  const ExperimentConfig c = parse_config(R"(# experiment
group = "shared"
seed = 1_000

[plant]
break_force = 12.5   # N

[controller]
flex_trigger = 0.15
vib_pulse_count = 3

[policy]
overshoot_sigma = 1.5

[schedule]
trials = 3
tracking_levels = [0.1, 0.2]

[io]
live_mode = true
listen_address = "0.0.0.0"

[analysis]
dpf = [5.5, 6.5]
)");
  CHECK(c.group == Group::SharedControl);
  CHECK(c.seed == 1000);
  CHECK(c.plant.break_force == 12.5);
  CHECK(c.controller.flex_trigger == 0.15);
  CHECK(c.vibration.pulse_count == 3);
  CHECK(c.policy.overshoot_sigma == 1.5);
  CHECK(c.schedule.trials == 3);
  CHECK(c.schedule.tracking_levels == std::vector<double>{0.1, 0.2});
  CHECK(c.io.live_mode);
  CHECK(c.io.listen_address == "0.0.0.0");
  CHECK(c.analysis.mbll.dpf[1] == 6.5);
  CHECK(c.session_id() == "shared-1000");
}

TEST_CASE("rejects unknown keys, sections, duplicates and bad types with the line") {
  CHECK(error_of("[plant]\nwarp = 1\n").find("line 2") != std::string::npos);
  CHECK(error_of("[engine]\n").find("line 1") != std::string::npos);
  CHECK(error_of("seed = 1\nseed = 2\n").find("line 2") != std::string::npos);
  CHECK(error_of("[plant]\ntick = \"fast\"\n").find("line 2") != std::string::npos);
  CHECK_FALSE(error_of("group = \"elite\"\n").empty());
  CHECK_FALSE(error_of("[schedule]\ntrials = 2.5\n").empty());
  CHECK_FALSE(error_of("[io]\nlive_mode = 1\n").empty());
  CHECK_FALSE(error_of("seed = \n").empty());
}

TEST_CASE("validation") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.schedule.trials = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.plant.hold_force = 20.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.io.port = 70000;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_FALSE(error_of("[schedule]\ntrials = 0\n").empty());
}

TEST_CASE("group decides the feedback channel of the operator") {
  ExperimentConfig c;
  c.seed = 9;
  CHECK_FALSE(c.operator_policy().uses_feedback);
  CHECK(c.operator_policy().seed == 9);
  c.group = Group::Vibrotactile;
  CHECK(c.operator_policy().uses_feedback);
}

TEST_CASE("json round trip") {
  ExperimentConfig c = parse_config("group = \"vibro\"\nseed = 77\n[plant]\ntick = 0.002\n");
  const nlohmann::json j = config_to_json(c);
  const ExperimentConfig back = config_from_json(j);
  CHECK(config_to_json(back) == j);
  CHECK(back.group == Group::Vibrotactile);
  CHECK(back.plant.tick == 0.002);
  nlohmann::json bad = j;
  bad["plant"].erase("tick");
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
}

TEST_CASE("loading a missing file is a config error") {
  CHECK_THROWS_AS(load_config("/nonexistent/hsc.toml"), ConfigError);
  const auto path = std::filesystem::temp_directory_path() / "hsc_cfg.toml";
  std::ofstream(path) << "seed = 4\n";
  CHECK(load_config(path).seed == 4);
  std::filesystem::remove(path);
}
