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
#include <string>
#include <string_view>
#include <vector>

#include "hsc/arbiter.hpp"
#include "hsc/autonomy.hpp"
#include "hsc/haptics.hpp"
#include "hsc/operator_io.hpp"
#include "hsc/plant.hpp"

namespace hsc {

/// Per-tick event flags, joined with '|' in the telemetry event column.
namespace event {
constexpr std::uint16_t kSlip = 1u << 0;
constexpr std::uint16_t kBreak = 1u << 1;
constexpr std::uint16_t kDrop = 1u << 2;
constexpr std::uint16_t kArmed = 1u << 3;
constexpr std::uint16_t kAutoOn = 1u << 4;
constexpr std::uint16_t kAutoRelease = 1u << 5;
constexpr std::uint16_t kDisable = 1u << 6;
constexpr std::uint16_t kButton = 1u << 7;
constexpr std::uint16_t kObjectReset = 1u << 8;
constexpr std::uint16_t kSafetyStop = 1u << 9;
constexpr std::uint16_t kAll = (1u << 10) - 1;
}  // namespace event

std::string format_events(std::uint16_t bits);
/// Throws std::invalid_argument on an unknown name.
std::uint16_t parse_events(std::string_view text);
/// Names of the set bits, lowest first.
std::vector<std::string_view> event_names(std::uint16_t bits);

struct TelemetryRow {
  double t = 0.0;
  ModeTag mode = ModeTag::Standard;
  Stage stage = Stage::Idle;
  double flex = 0.0;
  double ext = 0.0;
  double motor = 0.0;
  double aperture_pct = 0.0;
  double load = 0.0;
  double envelope = 0.0;
  bool led = false;
  bool airborne = false;
  bool broken = false;
  std::uint16_t events = 0;

  bool operator==(const TelemetryRow&) const = default;
};

struct SessionParams {
  PlantParams plant;
  ControllerParams controller;
  VibrationParams vibration;
  double object_reset_delay = 2.0;  // s a broken object stays in the hand
  double lift_criterion = 3.0;      // s airborne that counts as a lift

  void validate() const;
};

/// One simulated participant, device and object, advanced one tick at a
/// time. Batch runs and the live server both drive this class, so the same
/// input stream always yields the same telemetry.
///
/// Tick order: the arbiter sees last tick's events and the operator input;
/// the plant integrates the chosen motor command; events and the tactor
/// envelope are derived from the new plant state.
class Session {
 public:
  Session(Group group, SessionParams params);

  /// With `safety_stop`, the input is discarded and the motor held at 0.
  TelemetryRow step(const OperatorInput& input, bool safety_stop = false);

  /// Opens the hand on a fresh object and restarts the trial clock. Mode,
  /// desired grip and the lift counter carry over; an engaged autonomous
  /// grasp is abandoned.
  void begin_trial();

  OperatorView view(double trial_duration) const;

  const PlantState& plant() const { return plant_; }
  const Arbiter& arbiter() const { return arbiter_; }
  const SessionParams& params() const { return params_; }
  Group group() const { return group_; }
  std::int64_t tick() const { return tick_; }
  double trial_time() const { return static_cast<double>(tick_) * params_.plant.tick; }
  int lifts() const { return lifts_; }
  double last_envelope() const { return last_envelope_; }

 private:
  Group group_;
  SessionParams params_;
  Arbiter arbiter_;
  PlantState plant_;
  LoadEvents pending_;
  std::vector<double> history_;     // ring of recent loads, slope window + 1
  std::vector<double> motor_history_;
  std::size_t window_ticks_;
  std::int64_t tick_ = 0;
  std::int64_t pulse_start_ = -1;
  std::int64_t broken_since_ = -1;
  std::int64_t airborne_ticks_ = 0;
  std::int64_t lift_ticks_;
  std::int64_t reset_ticks_;
  int lifts_ = 0;
  double last_envelope_ = 0.0;
};

}  // namespace hsc
