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

#include "hsc/arbiter.hpp"

#include <algorithm>
#include <cmath>

namespace hsc {

std::string_view to_string(Group group) {
  switch (group) {
    case Group::Standard: return "standard";
    case Group::Vibrotactile: return "vibro";
    case Group::SharedControl: return "shared";
  }
  return "standard";
}

std::optional<Group> parse_group(std::string_view text) {
  for (Group g : {Group::Standard, Group::Vibrotactile, Group::SharedControl}) {
    if (to_string(g) == text) return g;
  }
  return std::nullopt;
}

ModeTag mode_tag(const SessionMode& mode) {
  switch (mode.shared) {
    case SharedState::Manual: return ModeTag::Manual;
    case SharedState::Armed: return ModeTag::Armed;
    case SharedState::AutoActive: return ModeTag::Auto;
    case SharedState::None: break;
  }
  return mode.group == Group::Vibrotactile ? ModeTag::Vibro : ModeTag::Standard;
}

std::string_view to_string(ModeTag tag) {
  switch (tag) {
    case ModeTag::Standard: return "standard";
    case ModeTag::Vibro: return "vibro";
    case ModeTag::Manual: return "manual";
    case ModeTag::Armed: return "armed";
    case ModeTag::Auto: return "auto";
  }
  return "standard";
}

std::optional<ModeTag> parse_mode_tag(std::string_view text) {
  for (ModeTag m : {ModeTag::Standard, ModeTag::Vibro, ModeTag::Manual, ModeTag::Armed,
                    ModeTag::Auto}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

SessionMode reset_session(Group group) {
  switch (group) {
    case Group::Standard: return {group, SharedState::None, false, false};
    case Group::Vibrotactile: return {group, SharedState::None, false, true};
    case Group::SharedControl: return {group, SharedState::Manual, false, true};
  }
  return {};
}

Arbiter::Arbiter(Group group, const PlantParams& plant, const ControllerParams& controller)
    : plant_(plant),
      controller_(controller),
      mode_(reset_session(group)),
      window_ticks_(static_cast<std::size_t>(std::llround(controller.enable_hold / plant.tick))) {
  window_.reserve(window_ticks_);
}

bool Arbiter::button_pressed(bool level) {
  if (!level) {
    button_high_ticks_ = 0;
    button_latched_ = false;
    return false;
  }
  ++button_high_ticks_;
  const long needed = std::max<long>(1, std::lround(controller_.button_debounce / plant_.tick));
  if (!button_latched_ && button_high_ticks_ >= needed) {
    button_latched_ = true;
    return true;
  }
  return false;
}

void Arbiter::disable(double now) {
  mode_ = reset_session(Group::SharedControl);
  autonomy_ = AutoState{};
  window_.clear();
  window_open_ = false;
  release_ticks_ = 0;
  last_disable_ = now;
}

void Arbiter::end_autonomous_grasp() {
  if (mode_.shared == SharedState::AutoActive) {
    mode_.shared = SharedState::Armed;
    autonomy_.stage = Stage::Idle;
    autonomy_.settle_timer = 0.0;
    autonomy_.integral = 0.0;
  }
  window_.clear();
  release_ticks_ = 0;
}

ArbiterDecision Arbiter::step(const OperatorInput& input, const PlantState& plant,
                              const LoadEvents& events) {
  ArbiterDecision out;
  out.manual_command = proportional_command(input, controller_.flex_trigger, plant_);
  const bool pressed = button_pressed(input.button);
  const double now = plant.t;

  if (mode_.group != Group::SharedControl) {
    out.motor = out.manual_command;
    return out;
  }

  const bool engaged_or_armed =
      mode_.shared == SharedState::Armed || mode_.shared == SharedState::AutoActive;
  if (engaged_or_armed && (events.any() || pressed)) {
    disable(now);
    out.transition = Transition::Disabled;
    out.cause = pressed        ? DisableCause::Button
                : events.brk   ? DisableCause::Break
                : events.drop  ? DisableCause::Drop
                               : DisableCause::Slip;
    out.motor = out.manual_command;
    return out;
  }

  switch (mode_.shared) {
    case SharedState::None:
      break;

    case SharedState::Manual: {
      out.motor = out.manual_command;
      // The window opens with the lift; an interrupted or rejected one waits
      // for the object to be put down before the next demonstration.
      if (!plant.airborne) {
        window_.clear();
        window_open_ = true;
        break;
      }
      if (!window_open_) break;
      if (plant.broken || events.any()) {
        window_.clear();
        window_open_ = false;
        break;
      }
      window_.push_back(plant.load_voltage);
      if (window_.size() == window_ticks_) {
        const auto desired = capture_desired_grip(window_, plant_.tick, controller_);
        window_.clear();
        window_open_ = false;
        if (desired) {
          autonomy_ = AutoState{};
          autonomy_.desired_grip = desired;
          mode_.shared = SharedState::Armed;
          mode_.led = true;
          mode_.feedback_enabled = false;
          out.transition = Transition::Armed;
        }
      }
      break;
    }

    case SharedState::Armed:
      if (input.flex > controller_.flex_trigger) {
        autonomy_ = start_autonomy(autonomy_, now);
        mode_.shared = SharedState::AutoActive;
        release_ticks_ = 0;
        out.transition = Transition::Engaged;
        // Falls through to the engaged branch below on the same tick.
      } else {
        out.motor = std::min(0.0, out.manual_command);
        break;
      }
      [[fallthrough]];

    case SharedState::AutoActive: {
      if (out.transition != Transition::Engaged && out.manual_command < 0.0) {
        ++release_ticks_;
      } else {
        release_ticks_ = 0;
      }
      const long needed = std::lround(controller_.release_debounce / plant_.tick);
      if (out.transition != Transition::Engaged && out.manual_command < 0.0 &&
          release_ticks_ >= needed) {
        mode_.shared = SharedState::Armed;
        autonomy_.stage = Stage::Idle;
        autonomy_.integral = 0.0;
        autonomy_.settle_timer = 0.0;
        release_ticks_ = 0;
        out.transition = Transition::Released;
        out.motor = out.manual_command;
        break;
      }
      const AutonomyInputs in{plant.load_voltage, plant.aperture, -plant.aperture_velocity};
      const AutonomyStep step = autonomy_step(autonomy_, in, now, plant_.tick, controller_);
      autonomy_ = step.state;
      out.auto_command = to_motor_volts(step.command, plant_);
      out.motor = out.auto_command;
      out.path = CommandPath::Autonomous;
      break;
    }
  }
  return out;
}

}  // namespace hsc
