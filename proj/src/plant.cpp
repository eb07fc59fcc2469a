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

#include "hsc/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hsc {

namespace {

constexpr double kLiftLevel = 0.5;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void PlantParams::validate() const {
  require(std::isfinite(rest_voltage) && std::isfinite(contact_voltage) &&
              std::isfinite(volts_per_newton),
          "plant: non-finite voltage parameter");
  require(0.0 < contact_voltage && contact_voltage < rest_voltage,
          "plant: need 0 < contact_voltage < rest_voltage");
  require(volts_per_newton > 0.0, "plant: volts_per_newton must be > 0");
  const double full_scale = rest_voltage / volts_per_newton;
  require(hold_force > 0.0 && hold_force < break_force,
          "plant: need 0 < hold_force < break_force");
  require(break_force < full_scale,
          "plant: break_force must map above 0 V on the load cell");
  require(break_force > contact_preload(),
          "plant: break_force must exceed the contact preload");
  require(motor_deadband > 0.0 && motor_deadband < motor_max,
          "plant: need 0 < motor_deadband < motor_max");
  require(tick > 0.0 && std::isfinite(tick), "plant: tick must be > 0");
  require(max_aperture > object_width && object_width > 0.0,
          "plant: need max_aperture > object_width > 0");
  require(break_compression > 0.0 && break_compression < object_width,
          "plant: break_compression out of range");
  require(aperture_gain > 0.0, "plant: aperture_gain must be > 0");
}

double PlantParams::contact_preload() const {
  return (rest_voltage - contact_voltage) / volts_per_newton;
}

double PlantParams::wall_stiffness() const {
  return (break_force - contact_preload()) / break_compression;
}

double PlantParams::wall_force(double compression) const {
  if (compression <= 0.0) return 0.0;
  return contact_preload() + wall_stiffness() * compression;
}

PlantState initial_plant_state(const PlantParams& params, double aperture) {
  PlantState s;
  s.aperture = std::clamp(aperture, 0.0, params.max_aperture);
  s.load_voltage = params.rest_voltage;
  const double compression = params.object_width - s.aperture;
  if (compression > 0.0) {
    const double c = std::min(compression, params.break_compression);
    s.aperture = params.object_width - c;
    s.wall_displacement = c;
    s.grip_force = params.wall_force(c);
    s.in_contact = true;
    s.load_voltage = load_voltage(s.grip_force, params);
    s.broken = s.grip_force >= params.break_force;
  }
  return s;
}

PlantState initial_plant_state(const PlantParams& params) {
  return initial_plant_state(params, params.max_aperture);
}

double load_voltage(double force, const PlantParams& params) {
  if (!std::isfinite(force)) throw std::invalid_argument("load_voltage: non-finite force");
  return std::clamp(params.rest_voltage - params.volts_per_newton * force, 0.0,
                    params.rest_voltage);
}

PlantState step_plant(const PlantState& state, double motor, double lift,
                      const PlantParams& params) {
  if (!std::isfinite(motor) || !std::isfinite(lift)) {
    throw std::invalid_argument("step_plant: non-finite input");
  }
  PlantState next = state;
  next.t = state.t + params.tick;
  if (state.broken) {
    next.aperture_velocity = 0.0;
    return next;
  }

  const double magnitude = std::min(std::abs(motor), params.motor_max);
  double rate = 0.0;
  if (magnitude >= params.motor_deadband) {
    rate = -std::copysign(params.aperture_gain * (magnitude - params.motor_deadband), motor);
  }
  double aperture = std::clamp(state.aperture + rate * params.tick, 0.0, params.max_aperture);

  // An object that slipped on the previous tick falls out of the grasp now.
  if (state.airborne && state.grip_force < params.hold_force) {
    next.airborne = false;
    next.airborne_since.reset();
    next.object_seated = false;
  }
  if (!next.object_seated && aperture >= params.object_width) next.object_seated = true;

  double force = 0.0;
  double compression = 0.0;
  if (next.object_seated) {
    aperture = std::max(aperture, params.object_width - params.break_compression);
    compression = std::max(0.0, params.object_width - aperture);
    if (compression >= params.break_compression) {
      force = params.break_force;
      next.broken = true;
    } else {
      force = params.wall_force(compression);
    }
  }

  next.aperture_velocity = (aperture - state.aperture) / params.tick;
  next.aperture = aperture;
  next.grip_force = force;
  next.wall_displacement = compression;
  next.in_contact = compression > 0.0;
  next.load_voltage = load_voltage(force, params);

  if (next.airborne) {
    // A set-down lowers the object without losing it; a force deficit is
    // reported as slipping for this tick and drops it on the next.
    if (lift < kLiftLevel || !next.in_contact) {
      next.airborne = false;
      next.airborne_since.reset();
    }
  } else if (next.object_seated && next.in_contact && !next.broken && lift >= kLiftLevel &&
             force >= params.hold_force) {
    next.airborne = true;
    next.airborne_since = next.t;
  }
  return next;
}

HoldStatus hold_check(const PlantState& state, const PlantParams& params) {
  if (state.airborne) {
    return state.grip_force >= params.hold_force ? HoldStatus::Held : HoldStatus::Slipping;
  }
  return state.object_seated ? HoldStatus::Resting : HoldStatus::Dropped;
}

PlantState reset_object(const PlantState& state, const PlantParams& params) {
  PlantState next = state;
  next.broken = false;
  next.grip_force = 0.0;
  next.load_voltage = params.rest_voltage;
  next.in_contact = false;
  next.airborne = false;
  next.airborne_since.reset();
  next.wall_displacement = 0.0;
  next.object_seated = state.aperture >= params.object_width;
  next.aperture_velocity = 0.0;
  return next;
}

}  // namespace hsc
