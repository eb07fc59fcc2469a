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
#include <random>
#include <span>
#include <vector>

#include "hsc/plant.hpp"

namespace hsc {

/// Per-muscle maximum voluntary contraction, volts of EMG envelope.
class MvcCalibration {
 public:
  MvcCalibration(double flex_mvc, double ext_mvc);

  double flex_mvc() const { return flex_mvc_; }
  double ext_mvc() const { return ext_mvc_; }
  double normalize_flex(double raw) const;
  double normalize_ext(double raw) const;

 private:
  double flex_mvc_;
  double ext_mvc_;
};

/// clamp(raw / mvc, 0, 1). Throws std::invalid_argument for mvc <= 0.
double normalize(double raw, double mvc);

/// One tick of operator commands, MVC-normalized.
struct OperatorInput {
  double flex = 0.0;
  double ext = 0.0;
  double lift = 0.0;
  bool button = false;
};

/// Throws std::invalid_argument unless every channel is finite and in [0, 1].
void validate_input(const OperatorInput& input);

/// Direct agonist-antagonist speed control. The net activation flex - ext
/// beyond `flex_threshold` maps affinely onto the motor's deadband..max range;
/// inside the threshold the motor is off. Positive volts close the device.
double proportional_command(const OperatorInput& input, double flex_threshold,
                            const PlantParams& plant);

/// Net activation that proportional_command maps to `motor` volts (inverse
/// of the affine law for |motor| in [deadband, max]; 0 otherwise).
double activation_for_command(double motor, double flex_threshold, const PlantParams& plant);

/// Synthetic participant.
struct PolicyParams {
  double target_force = 8.0;        // N, planned grip before per-attempt error
  double rise_time = 0.6;           // s, contact-to-target squeeze duration
  double overshoot_sigma = 2.0;     // N, per-attempt planning error
  double tremor_sigma = 0.03;       // per-tick activation noise while a muscle is active
  bool uses_feedback = false;
  std::uint64_t seed = 1;
  double reaction_time = 0.2;       // s, felt vibration to motor response
  double perception_sigma = 0.15;   // log-normal sd of felt vibration intensity
  double correction_gain = 4.0;     // mm/s of closing per volt of perceived weakness
  double crosstalk_rate = 0.08;     // chance per attempt of a flexor burst as the arm lifts

  void validate() const;
};

/// What a participant can see or feel at one tick.
struct OperatorView {
  double trial_time = 0.0;
  double time_remaining = 0.0;
  double aperture = 0.0;
  bool contact = false;
  bool airborne = false;
  bool broken = false;
  bool object_seated = true;
  double felt_envelope = 0.0;       // tactor envelope, V
  bool led = false;
  bool autonomy_engaged = false;
  bool autonomy_settled = false;
  bool demonstrating = false;       // manual grasp that will train the controller
};

/// Ramp-and-hold grasp-and-lift participant with a seeded random stream.
///
/// Each attempt plans a grip force `target_force + N(0, overshoot_sigma)` and
/// squeezes toward it open-loop over `rise_time`. A feedback user also reads
/// the tactor envelope through `reaction_time` of delay and a per-attempt
/// log-normal intensity bias, stops squeezing once the felt load reaches the
/// upper part of the 3-4 V margin, and tops up a weak grip at
/// `correction_gain` mm/s per volt of perceived error. With the LED lit the
/// participant instead triggers the autonomous closer and waits for it to
/// settle. Lift is raised after a stable grasp and held past three seconds.
class ScriptedOperator {
 public:
  ScriptedOperator(PolicyParams policy, PlantParams plant, double flex_threshold,
                   double contact_threshold = 4.3, double vibration_gain = 10.0);

  OperatorInput next(const OperatorView& view);

  /// Called at each trial start; drops any attempt in progress.
  void begin_trial();

  int attempts_started() const { return attempts_started_; }
  std::mt19937_64& rng() { return rng_; }

  enum class Phase {
    Rest, Open, Approach, Squeeze, Settle, Correct, Lift, Lower, Trigger, AutoWait, Abort, Idle
  };
  Phase phase() const { return phase_; }

 private:
  void enter(Phase phase, double t);
  void begin_attempt(const OperatorView& view);
  double perceived_load(double t) const;
  double closing_activation(double speed) const;
  OperatorInput with_tremor(OperatorInput input);

  PolicyParams policy_;
  PlantParams plant_;
  double flex_threshold_;
  double contact_threshold_;
  double vibration_gain_;
  std::mt19937_64 rng_;

  Phase phase_ = Phase::Rest;
  double phase_start_ = 0.0;
  double planned_force_ = 0.0;
  double perception_bias_ = 1.0;
  double squeeze_activation_ = 0.0;
  double squeeze_end_ = 0.0;
  double airborne_start_ = -1.0;
  bool demo_checked_ = false;
  bool demo_bad_ = false;
  double crosstalk_level_ = 0.0;
  double crosstalk_onset_ = 0.0;
  double crosstalk_length_ = 0.0;
  int attempts_started_ = 0;
  std::vector<double> felt_;        // envelope history, one sample per tick
};

/// RMSE of `signal` against each presented level over consecutive `hold`
/// windows. Throws std::invalid_argument when the windows exceed the signal.
std::vector<double> tracking_assessment(std::span<const double> levels,
                                        std::span<const double> signal, double hold,
                                        double tick);

}  // namespace hsc
