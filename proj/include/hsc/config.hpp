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

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hsc/analysis.hpp"
#include "hsc/arbiter.hpp"
#include "hsc/autonomy.hpp"
#include "hsc/haptics.hpp"
#include "hsc/operator_io.hpp"
#include "hsc/plant.hpp"
#include "hsc/session.hpp"

namespace hsc {

struct ScheduleConfig {
  int trials = 7;
  double trial_duration = 60.0;     // s
  double break_duration = 30.0;     // s, skipped in simulation
  double lift_criterion = 3.0;      // s airborne
  double object_reset_delay = 2.0;  // s before a broken object is replaced
  std::vector<double> tracking_levels{0.125, 0.25, 0.375};
  double tracking_hold = 5.0;       // s per level

  void validate() const;
};

struct IoConfig {
  std::string out_dir = "results";
  bool live_mode = false;
  std::string listen_address = "127.0.0.1";
  int port = 8765;
  double speed = 1.0;               // live pacing, simulated seconds per wall second

  void validate() const;
};

struct ExperimentConfig {
  Group group = Group::Standard;
  std::uint64_t seed = 1;
  PlantParams plant;
  ControllerParams controller;
  VibrationParams vibration;
  PolicyParams policy;
  ScheduleConfig schedule;
  IoConfig io;
  AnalysisParams analysis;

  /// Throws ConfigError.
  void validate() const;
  SessionParams session_params() const;
  /// Policy with the experiment seed and the group's feedback channel.
  PolicyParams operator_policy() const;
  std::string session_id() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Applies a TOML-style document on top of `base`. Supported: top-level
/// `group` and `seed`, sections plant, controller, policy, schedule, io and
/// analysis, `#` comments, strings, numbers, booleans and arrays of numbers.
/// Unknown sections or keys, duplicates and type mismatches throw
/// ConfigError with the line number.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Every configurable value, by section.
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& json);

}  // namespace hsc
