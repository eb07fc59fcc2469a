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

namespace hsc {

/// Physical constants of the voluntary-closing terminal device and the
/// brittle instrumented object.
///
/// The object's collapsible wall is a preloaded linear spring: the load cell
/// reads exactly `contact_voltage` at first touch and `break_force` after
/// `break_compression` mm of wall travel.
struct PlantParams {
  double max_aperture = 83.0;       // mm
  double object_width = 74.0;       // mm, grasp axis
  double object_mass = 310.0;       // g, recorded only
  double rest_voltage = 4.5;        // V
  double contact_voltage = 4.3;     // V
  double volts_per_newton = 0.15;   // V/N
  double break_force = 11.0;        // N
  double hold_force = 3.0;          // N
  double motor_deadband = 1.5;      // V
  double motor_max = 7.0;           // V
  double aperture_gain = 15.0;      // mm/s per volt above the deadband
  double break_compression = 4.0;   // mm
  double tick = 0.001;              // s

  /// Throws std::invalid_argument on an inconsistent parameter set.
  void validate() const;

  /// Force at first touch, N. Places L exactly on the contact threshold.
  double contact_preload() const;
  /// Wall stiffness, N/mm.
  double wall_stiffness() const;
  /// Force produced by `compression` mm of wall travel (0 when not touching).
  double wall_force(double compression) const;
};

struct PlantState {
  double t = 0.0;
  double aperture = 83.0;           // mm
  double aperture_velocity = 0.0;   // mm/s, negative while closing
  double grip_force = 0.0;          // N
  double load_voltage = 4.5;        // V
  bool in_contact = false;
  bool airborne = false;
  std::optional<double> airborne_since;
  bool broken = false;
  double wall_displacement = 0.0;   // mm
  // False after a drop or an object reset, until the hand opens wider than
  // the object again (the object is placed back between the jaws).
  bool object_seated = true;
};

enum class HoldStatus { Resting, Held, Slipping, Dropped };

/// Open hand at `aperture`, object seated and unloaded.
PlantState initial_plant_state(const PlantParams& params, double aperture);
PlantState initial_plant_state(const PlantParams& params);

/// Advance one tick. Positive motor volts close the device. Throws
/// std::invalid_argument on non-finite inputs. A broken state only advances t.
PlantState step_plant(const PlantState& state, double motor, double lift,
                      const PlantParams& params);

/// Load-cell voltage for a grip force: rest minus a linear drop, clamped.
double load_voltage(double force, const PlantParams& params);

HoldStatus hold_check(const PlantState& state, const PlantParams& params);

/// Experimenter resets the collapsed wall. The object comes out of the grasp
/// and is seated again once the hand opens past it.
PlantState reset_object(const PlantState& state, const PlantParams& params);

}  // namespace hsc
