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

#include "hsc/session.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace hsc {

namespace {

constexpr std::array<std::string_view, 10> kEventNames = {
    "slip", "break", "drop", "armed", "auto_on", "auto_release",
    "disable", "button", "object_reset", "safety_stop"};

}  // namespace

std::vector<std::string_view> event_names(std::uint16_t bits) {
  std::vector<std::string_view> names;
  for (std::size_t i = 0; i < kEventNames.size(); ++i) {
    if (bits & (1u << i)) names.push_back(kEventNames[i]);
  }
  return names;
}

std::string format_events(std::uint16_t bits) {
  std::string out;
  for (std::string_view name : event_names(bits)) {
    if (!out.empty()) out += '|';
    out += name;
  }
  return out;
}

std::uint16_t parse_events(std::string_view text) {
  std::uint16_t bits = 0;
  while (!text.empty()) {
    const auto bar = text.find('|');
    const std::string_view name = text.substr(0, bar);
    const auto it = std::find(kEventNames.begin(), kEventNames.end(), name);
    if (it == kEventNames.end()) {
      throw std::invalid_argument("unknown event name '" + std::string(name) + "'");
    }
    bits |= static_cast<std::uint16_t>(1u << (it - kEventNames.begin()));
    if (bar == std::string_view::npos) break;
    text.remove_prefix(bar + 1);
  }
  return bits;
}

void SessionParams::validate() const {
  plant.validate();
  controller.validate();
  vibration.validate();
  if (!(object_reset_delay >= 0.0)) throw std::invalid_argument("object_reset_delay must be >= 0");
  if (!(lift_criterion > 0.0)) throw std::invalid_argument("lift_criterion must be > 0");
}

Session::Session(Group group, SessionParams params)
    : group_(group),
      params_((params.validate(), params)),
      arbiter_(group, params_.plant, params_.controller),
      plant_(initial_plant_state(params_.plant)),
      window_ticks_(std::max<std::size_t>(
          1, static_cast<std::size_t>(
                 std::llround(params_.controller.slope_window / params_.plant.tick)))),
      lift_ticks_(std::llround(params_.lift_criterion / params_.plant.tick)),
      reset_ticks_(std::llround(params_.object_reset_delay / params_.plant.tick)) {
  history_.reserve(window_ticks_ + 1);
  motor_history_.reserve(window_ticks_ + 1);
}

void Session::begin_trial() {
  plant_ = initial_plant_state(params_.plant);
  arbiter_.end_autonomous_grasp();
  pending_ = {};
  history_.clear();
  motor_history_.clear();
  tick_ = 0;
  pulse_start_ = -1;
  broken_since_ = -1;
  airborne_ticks_ = 0;
  last_envelope_ = 0.0;
}

OperatorView Session::view(double trial_duration) const {
  OperatorView v;
  v.trial_time = trial_time();
  v.time_remaining = trial_duration - v.trial_time;
  v.aperture = plant_.aperture;
  v.contact = plant_.in_contact;
  v.airborne = plant_.airborne;
  v.broken = plant_.broken;
  v.object_seated = plant_.object_seated;
  v.felt_envelope = last_envelope_;
  const SessionMode& mode = arbiter_.mode();
  v.led = mode.led;
  v.autonomy_engaged = mode.shared == SharedState::AutoActive;
  v.autonomy_settled = v.autonomy_engaged && arbiter_.autonomy().stage == Stage::Holding;
  v.demonstrating = mode.shared == SharedState::Manual;
  return v;
}

TelemetryRow Session::step(const OperatorInput& raw_input, bool safety_stop) {
  const OperatorInput input = safety_stop ? OperatorInput{} : raw_input;
  if (!safety_stop) validate_input(input);
  const double dt = params_.plant.tick;

  std::uint16_t bits = 0;
  if (pending_.slip) bits |= event::kSlip;
  if (pending_.brk) bits |= event::kBreak;
  if (pending_.drop) bits |= event::kDrop;
  // Events are reported on the tick they are acted on.
  const LoadEvents acting = pending_;
  pending_ = {};

  const ArbiterDecision decision = arbiter_.step(input, plant_, acting);
  switch (decision.transition) {
    case Transition::Armed: bits |= event::kArmed; break;
    case Transition::Engaged: bits |= event::kAutoOn; break;
    case Transition::Released: bits |= event::kAutoRelease; break;
    case Transition::Disabled:
      bits |= event::kDisable;
      if (decision.cause == DisableCause::Button) bits |= event::kButton;
      pulse_start_ = tick_;
      break;
    case Transition::None: break;
  }
  double motor = decision.motor;
  if (safety_stop) {
    motor = 0.0;
    bits |= event::kSafetyStop;
  }

  const PlantState prev = plant_;
  plant_ = step_plant(plant_, motor, input.lift, params_.plant);
  ++tick_;

  // Load-release detection on the new sample. Opening the hand releases
  // load on purpose, so slopes inside a window that saw an opening command
  // are ignored.
  if (history_.size() == window_ticks_ + 1) {
    history_.erase(history_.begin());
    motor_history_.erase(motor_history_.begin());
  }
  history_.push_back(plant_.load_voltage);
  motor_history_.push_back(motor);
  LoadEvents next;
  if (!prev.broken && plant_.broken) next.brk = true;
  if (prev.airborne && !plant_.object_seated) next.drop = true;
  const bool opening = std::any_of(motor_history_.begin(), motor_history_.end(),
                                   [](double m) { return m < 0.0; });
  if (history_.size() >= 2 && !opening && !plant_.broken) {
    switch (detect_slip_break(history_, dt, params_.controller)) {
      case LoadEvent::Break: next.brk = true; break;
      case LoadEvent::Slip: next.slip = true; break;
      case LoadEvent::None: break;
    }
  }
  pending_ = next;

  if (plant_.broken) {
    if (broken_since_ < 0) broken_since_ = tick_;
    if (tick_ - broken_since_ >= reset_ticks_) {
      plant_ = reset_object(plant_, params_.plant);
      broken_since_ = -1;
      history_.clear();
      motor_history_.clear();
      bits |= event::kObjectReset;
    }
  }

  if (plant_.airborne) {
    if (++airborne_ticks_ == lift_ticks_) ++lifts_;
  } else {
    airborne_ticks_ = 0;
  }

  const SessionMode& mode = arbiter_.mode();
  double envelope = 0.0;
  if (pulse_start_ >= 0) {
    const double since = static_cast<double>(tick_ - 1 - pulse_start_) * dt;
    if (since < params_.vibration.pulse_pattern_length()) {
      envelope = disable_pulse_envelope(since, params_.vibration);
    } else {
      pulse_start_ = -1;
    }
  }
  if (pulse_start_ < 0 && mode.feedback_enabled) {
    envelope = vibration_amplitude(plant_.load_voltage, params_.vibration);
  }
  last_envelope_ = envelope;

  TelemetryRow row;
  row.t = static_cast<double>(tick_) * dt;
  row.mode = mode_tag(mode);
  row.stage = arbiter_.autonomy().stage;
  row.flex = input.flex;
  row.ext = input.ext;
  row.motor = motor;
  row.aperture_pct = 100.0 * plant_.aperture / params_.plant.max_aperture;
  row.load = plant_.load_voltage;
  row.envelope = envelope;
  row.led = mode.led;
  row.airborne = plant_.airborne;
  row.broken = plant_.broken;
  row.events = bits;
  return row;
}

}  // namespace hsc
