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

#include <optional>
#include <span>
#include <string_view>

#include "hsc/plant.hpp"

namespace hsc {

/// Autonomous closer, event detectors and shared-control timing.
struct ControllerParams {
  double flex_trigger = 0.1;        // normalized activation threshold f_L
  double stage1_gain = 2.5;         // V
  double stage1_floor = 0.3;
  double stage2_cap = 4.0;          // V
  double stage2_floor = -0.5;       // V
  double vel_lower = 2.0;           // mm/s closing speed
  double vel_upper = 8.0;           // mm/s closing speed
  double contact_load = 4.3;        // V
  double contact_aperture = 76.0;   // mm
  double kp = 1.0;                  // V/V
  double ki = 3.0;                  // V/(V s)
  double pi_cap = 12.0;             // V
  double settle_band = 0.05;        // fraction of the desired grip
  double settle_dwell = 0.2;        // s
  double slip_slope = 2.5;          // V/s
  double break_slope = 5.0;         // V/s
  double enable_hold = 1.0;         // s of clean lift that trains the setpoint
  double slope_window = 0.02;       // s
  double release_debounce = 0.05;   // s of opening intent that ends an autonomous grasp
  double button_debounce = 0.05;    // s

  void validate() const;
};

enum class Stage { Idle, Stage1, Stage2, Stage3, Holding };

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view text);

struct AutoState {
  Stage stage = Stage::Idle;
  double stage_entry_t = 0.0;
  double integral = 0.0;            // V s
  std::optional<double> desired_grip;
  double settle_timer = 0.0;
};

/// Decaying fast-close command, t measured from stage entry.
double stage1_command(double t_in_stage, const ControllerParams& params);

/// Growing approach command until contact, t measured from stage entry.
double stage2_command(double t_in_stage, const ControllerParams& params);

struct PiResult {
  double command;
  AutoState state;
};

/// PI grip regulation on the load-cell voltage. The error is L - L_d, so a
/// grip weaker than desired (higher voltage) commands more closing. The
/// integrator stops when the output is saturated in the error's direction.
/// Leaves Stage3 for Holding after |L - L_d| stays within the settle band for
/// the dwell time. Throws std::logic_error without a desired grip.
PiResult stage3_command(double load, const AutoState& state, double dt,
                        const ControllerParams& params);

bool detect_contact(double load, double aperture, const ControllerParams& params);

enum class LoadEvent { None, Slip, Break };

/// Classifies the newest sample of `history` (oldest first) from the load
/// slope over the last `slope_window`. Only rising voltage, that is load
/// release, counts. Throws std::invalid_argument for dt <= 0 or fewer than
/// two samples.
LoadEvent detect_slip_break(std::span<const double> history, double dt,
                            const ControllerParams& params);

/// Mean load over a clean `enable_hold` window. Returns nullopt when the
/// window itself shows a slip or break signature. Throws
/// std::invalid_argument when the window length is not enable_hold.
std::optional<double> capture_desired_grip(std::span<const double> window, double dt,
                                           const ControllerParams& params);

/// Plant measurements the closer reads each tick.
struct AutonomyInputs {
  double load = 0.0;
  double aperture = 0.0;
  double closing_speed = 0.0;       // mm/s, positive while closing
};

struct AutonomyStep {
  double command;                   // stage output before actuator mapping
  AutoState state;
};

AutoState start_autonomy(const AutoState& state, double now);

/// Advances Stage1 -> Stage2 -> Stage3 -> Holding by one tick and returns
/// the active stage's output. Stage1 hands over once the closing speed falls
/// inside (vel_lower, vel_upper) or contact is seen; Stage2 hands over on
/// contact.
AutonomyStep autonomy_step(const AutoState& state, const AutonomyInputs& in, double now,
                           double dt, const ControllerParams& params);

/// Stage output as motor volts: clamped to [0, motor_max], and 0 below the
/// deadband where the motor would not turn anyway.
double to_motor_volts(double stage_command, const PlantParams& plant);

}  // namespace hsc
