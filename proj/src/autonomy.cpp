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

#include "hsc/autonomy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hsc {

void ControllerParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(flex_trigger >= 0.0 && flex_trigger < 1.0, "controller: flex_trigger must be in [0, 1)");
  require(settle_band > 0.0 && settle_band < 1.0, "controller: settle_band must be in (0, 1)");
  require(slip_slope > 0.0 && slip_slope < break_slope,
          "controller: need 0 < slip_slope < break_slope");
  require(vel_lower < vel_upper, "controller: need vel_lower < vel_upper");
  require(stage1_gain > 0.0 && stage1_floor > 0.0 && stage1_floor < 1.0,
          "controller: invalid stage1 shape");
  require(stage2_cap > stage2_floor, "controller: stage2_cap must exceed stage2_floor");
  require(pi_cap > 0.0 && kp >= 0.0 && ki >= 0.0, "controller: invalid PI gains");
  require(settle_dwell >= 0.0 && enable_hold > 0.0 && slope_window > 0.0,
          "controller: dwell, enable_hold and slope_window must be positive");
  require(release_debounce >= 0.0 && button_debounce >= 0.0,
          "controller: debounce times must be >= 0");
  require(contact_load > 0.0 && contact_aperture > 0.0, "controller: invalid contact thresholds");
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Idle: return "idle";
    case Stage::Stage1: return "stage1";
    case Stage::Stage2: return "stage2";
    case Stage::Stage3: return "stage3";
    case Stage::Holding: return "holding";
  }
  return "idle";
}

std::optional<Stage> parse_stage(std::string_view text) {
  for (Stage s : {Stage::Idle, Stage::Stage1, Stage::Stage2, Stage::Stage3, Stage::Holding}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

double stage1_command(double t_in_stage, const ControllerParams& params) {
  return params.stage1_gain * std::max(params.stage1_floor, std::exp(-t_in_stage));
}

double stage2_command(double t_in_stage, const ControllerParams& params) {
  return std::max(params.stage2_floor, std::min(std::exp(t_in_stage), params.stage2_cap));
}

PiResult stage3_command(double load, const AutoState& state, double dt,
                        const ControllerParams& params) {
  if (!state.desired_grip) throw std::logic_error("stage3_command: no desired grip captured");
  const double desired = *state.desired_grip;
  const double error = load - desired;

  // Output from the integral accumulated so far, then integrate this tick's
  // error unless the output is already pinned in the error's direction.
  AutoState next = state;
  const double raw = params.kp * error + params.ki * state.integral;
  const double command = std::clamp(raw, 0.0, params.pi_cap);
  const bool winding_up = (raw >= params.pi_cap && error > 0.0) || (raw <= 0.0 && error < 0.0);
  if (!winding_up) next.integral += error * dt;

  if (std::abs(error) <= params.settle_band * desired) {
    next.settle_timer += dt;
  } else {
    next.settle_timer = 0.0;
  }
  // Dwell compared in ticks so a 200 ms dwell at 1 ms is exactly 200 ticks.
  if (next.settle_timer > 0.0 &&
      std::llround(next.settle_timer / dt) >= std::llround(params.settle_dwell / dt)) {
    next.stage = Stage::Holding;
  }
  return {command, next};
}

bool detect_contact(double load, double aperture, const ControllerParams& params) {
  return load < params.contact_load && aperture < params.contact_aperture;
}

LoadEvent detect_slip_break(std::span<const double> history, double dt,
                            const ControllerParams& params) {
  if (!(dt > 0.0)) throw std::invalid_argument("detect_slip_break: dt must be > 0");
  if (history.size() < 2) throw std::invalid_argument("detect_slip_break: need two samples");
  const auto window = std::max<std::size_t>(1, std::llround(params.slope_window / dt));
  const std::size_t span = std::min(window, history.size() - 1);
  const double slope =
      (history.back() - history[history.size() - 1 - span]) / (static_cast<double>(span) * dt);
  if (slope > params.break_slope) return LoadEvent::Break;
  if (slope > params.slip_slope) return LoadEvent::Slip;
  return LoadEvent::None;
}

std::optional<double> capture_desired_grip(std::span<const double> window, double dt,
                                           const ControllerParams& params) {
  if (!(dt > 0.0)) throw std::invalid_argument("capture_desired_grip: dt must be > 0");
  const auto expected = static_cast<std::size_t>(std::llround(params.enable_hold / dt));
  if (window.size() != expected) {
    throw std::invalid_argument("capture_desired_grip: window must span enable_hold");
  }
  for (std::size_t n = 2; n <= window.size(); ++n) {
    if (detect_slip_break(window.first(n), dt, params) != LoadEvent::None) return std::nullopt;
  }
  const double sum = std::accumulate(window.begin(), window.end(), 0.0);
  return sum / static_cast<double>(window.size());
}

AutoState start_autonomy(const AutoState& state, double now) {
  AutoState next = state;
  next.stage = Stage::Stage1;
  next.stage_entry_t = now;
  next.integral = 0.0;
  next.settle_timer = 0.0;
  return next;
}

AutonomyStep autonomy_step(const AutoState& state, const AutonomyInputs& in, double now,
                           double dt, const ControllerParams& params) {
  AutoState next = state;
  const bool contact = detect_contact(in.load, in.aperture, params);

  if (next.stage == Stage::Stage1 &&
      (contact || (in.closing_speed > params.vel_lower && in.closing_speed < params.vel_upper))) {
    next.stage = Stage::Stage2;
    next.stage_entry_t = now;
  } else if (next.stage == Stage::Stage2 && contact) {
    next.stage = Stage::Stage3;
    next.stage_entry_t = now;
    next.integral = 0.0;
    next.settle_timer = 0.0;
  }

  switch (next.stage) {
    case Stage::Stage1:
      return {stage1_command(now - next.stage_entry_t, params), next};
    case Stage::Stage2:
      return {stage2_command(now - next.stage_entry_t, params), next};
    case Stage::Stage3: {
      const PiResult pi = stage3_command(in.load, next, dt, params);
      return {pi.command, pi.state};
    }
    case Stage::Idle:
    case Stage::Holding:
      break;
  }
  return {0.0, next};
}

double to_motor_volts(double stage_command, const PlantParams& plant) {
  const double volts = std::clamp(stage_command, 0.0, plant.motor_max);
  return volts < plant.motor_deadband ? 0.0 : volts;
}

}  // namespace hsc
