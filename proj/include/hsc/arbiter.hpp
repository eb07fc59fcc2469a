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
#include <string_view>
#include <vector>

#include "hsc/autonomy.hpp"
#include "hsc/operator_io.hpp"
#include "hsc/plant.hpp"

namespace hsc {

enum class Group { Standard, Vibrotactile, SharedControl };

std::string_view to_string(Group group);
std::optional<Group> parse_group(std::string_view text);

enum class SharedState { None, Manual, Armed, AutoActive };

struct SessionMode {
  Group group = Group::Standard;
  SharedState shared = SharedState::None;
  bool led = false;
  bool feedback_enabled = false;

  bool operator==(const SessionMode&) const = default;
};

/// Flattened mode as it appears in telemetry and on the wire.
enum class ModeTag { Standard, Vibro, Manual, Armed, Auto };

ModeTag mode_tag(const SessionMode& mode);
std::string_view to_string(ModeTag tag);
std::optional<ModeTag> parse_mode_tag(std::string_view text);

/// Every session starts here; shared control starts in manual mode.
SessionMode reset_session(Group group);

struct LoadEvents {
  bool slip = false;
  bool brk = false;
  bool drop = false;

  bool any() const { return slip || brk || drop; }
};

enum class CommandPath { Manual, Autonomous };
enum class Transition { None, Armed, Engaged, Released, Disabled };
enum class DisableCause { None, Slip, Break, Drop, Button };

struct ArbiterDecision {
  double motor = 0.0;
  double manual_command = 0.0;      // proportional command offered by the operator
  double auto_command = 0.0;        // mapped autonomous command, 0 when not engaged
  CommandPath path = CommandPath::Manual;
  Transition transition = Transition::None;
  DisableCause cause = DisableCause::None;
};

/// Haptic shared-control mode machine.
///
/// Manual control (with feedback) becomes Armed after the first
/// `enable_hold` seconds of a clean lift; the mean load over that window is
/// the desired grip. Each demonstration needs its own lift. Armed holds the closing direction until flexion crosses the
/// trigger, then the autonomous closer drives the motor. An opening command
/// held for `release_debounce` ends an autonomous grasp and re-arms. Slip,
/// break, drop or a debounced button press while Armed or engaged disables
/// autonomy, clears the desired grip and starts the disable pulse.
class Arbiter {
 public:
  Arbiter(Group group, const PlantParams& plant, const ControllerParams& controller);

  ArbiterDecision step(const OperatorInput& input, const PlantState& plant,
                       const LoadEvents& events);

  const SessionMode& mode() const { return mode_; }
  const AutoState& autonomy() const { return autonomy_; }
  std::optional<double> last_disable_time() const { return last_disable_; }

  /// Trial boundary: an engaged autonomous grasp is abandoned and the
  /// machine re-arms with the same desired grip.
  void end_autonomous_grasp();

 private:
  void disable(double now);
  bool button_pressed(bool level);

  PlantParams plant_;
  ControllerParams controller_;
  SessionMode mode_;
  AutoState autonomy_;
  std::vector<double> window_;
  std::size_t window_ticks_;
  bool window_open_ = true;
  long button_high_ticks_ = 0;
  bool button_latched_ = false;
  long release_ticks_ = 0;
  std::optional<double> last_disable_;
};

}  // namespace hsc
