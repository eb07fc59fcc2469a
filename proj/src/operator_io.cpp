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

#include "hsc/operator_io.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hsc {

MvcCalibration::MvcCalibration(double flex_mvc, double ext_mvc)
    : flex_mvc_(flex_mvc), ext_mvc_(ext_mvc) {
  if (!(flex_mvc > 0.0) || !(ext_mvc > 0.0) || !std::isfinite(flex_mvc) ||
      !std::isfinite(ext_mvc)) {
    throw std::invalid_argument("MVC must be positive and finite");
  }
}

double MvcCalibration::normalize_flex(double raw) const { return normalize(raw, flex_mvc_); }
double MvcCalibration::normalize_ext(double raw) const { return normalize(raw, ext_mvc_); }

double normalize(double raw, double mvc) {
  if (!(mvc > 0.0)) throw std::invalid_argument("normalize: mvc must be > 0");
  if (!std::isfinite(raw)) throw std::invalid_argument("normalize: non-finite sample");
  return std::clamp(raw / mvc, 0.0, 1.0);
}

void validate_input(const OperatorInput& input) {
  for (double v : {input.flex, input.ext, input.lift}) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw std::invalid_argument("operator input channels must be finite and in [0, 1]");
    }
  }
}

double proportional_command(const OperatorInput& input, double flex_threshold,
                            const PlantParams& plant) {
  const double net = input.flex - input.ext;
  const double magnitude = std::abs(net);
  if (magnitude <= flex_threshold) return 0.0;
  const double fraction = std::min(1.0, (magnitude - flex_threshold) / (1.0 - flex_threshold));
  const double volts =
      plant.motor_deadband + fraction * (plant.motor_max - plant.motor_deadband);
  return std::copysign(volts, net);
}

double activation_for_command(double motor, double flex_threshold, const PlantParams& plant) {
  const double magnitude = std::abs(motor);
  if (magnitude < plant.motor_deadband) return 0.0;
  const double fraction = std::min(1.0, (magnitude - plant.motor_deadband) /
                                            (plant.motor_max - plant.motor_deadband));
  return std::copysign(flex_threshold + fraction * (1.0 - flex_threshold), motor);
}

void PolicyParams::validate() const {
  if (!(rise_time > 0.0)) throw std::invalid_argument("policy: rise_time must be > 0");
  if (overshoot_sigma < 0.0 || tremor_sigma < 0.0 || perception_sigma < 0.0) {
    throw std::invalid_argument("policy: sigmas must be >= 0");
  }
  if (!(crosstalk_rate >= 0.0 && crosstalk_rate <= 1.0)) {
    throw std::invalid_argument("policy: crosstalk_rate must be in [0, 1]");
  }
  if (reaction_time < 0.0 || correction_gain < 0.0 || !(target_force > 0.0)) {
    throw std::invalid_argument("policy: invalid reaction_time, correction_gain or target_force");
  }
}

namespace {

// Behavioural constants of the synthetic participant. Voltages are load-cell
// readings as the participant perceives them through the tactor.
constexpr double kApproachActivation = 0.8;
constexpr double kOpenActivation = 0.8;
constexpr double kSlowZone = 1.5;          // mm before the object where squeezing starts
constexpr double kOpenClearance = 4.0;     // mm past the object before resting
constexpr double kRestTime = 0.8;          // s between attempts
constexpr double kStableTime = 0.5;        // s of stable grasp before lifting
constexpr double kLiftHold = 3.3;          // s held in the air
constexpr double kLiftTimeout = 1.0;       // s to give up on an object that will not rise
constexpr double kTriggerActivation = 0.35;
constexpr double kTriggerTime = 0.1;       // s
constexpr double kAutoTimeout = 6.0;       // s
constexpr double kStopLoad = 3.75;         // stop squeezing once felt this strongly
constexpr double kAimLoad = 3.5;           // corrections aim here
constexpr double kWeakLoad = 3.9;          // a felt grip weaker than this gets topped up
constexpr double kDemoLow = 3.3;           // demonstrations felt outside this band are redone
constexpr double kDemoHigh = 3.7;
constexpr double kDemoCheck = 0.3;         // s into a demonstration lift
constexpr double kCrosstalkLow = 0.12;     // flexor activation during a lift burst
constexpr double kCrosstalkHigh = 0.25;
constexpr double kCrosstalkOnset = 0.15;   // s after the lift starts, at most
constexpr double kCrosstalkShortest = 0.1; // s
constexpr double kCrosstalkSpread = 0.1;   // s

}  // namespace

ScriptedOperator::ScriptedOperator(PolicyParams policy, PlantParams plant, double flex_threshold,
                                   double contact_threshold, double vibration_gain)
    : policy_(policy),
      plant_(plant),
      flex_threshold_(flex_threshold),
      contact_threshold_(contact_threshold),
      vibration_gain_(vibration_gain),
      rng_(policy.seed) {
  policy_.validate();
  const auto delay = static_cast<std::size_t>(std::lround(policy_.reaction_time / plant_.tick));
  felt_.assign(delay + 1, 0.0);
}

void ScriptedOperator::begin_trial() {
  phase_ = Phase::Rest;
  phase_start_ = 0.0;
  airborne_start_ = -1.0;
  std::fill(felt_.begin(), felt_.end(), 0.0);
}

void ScriptedOperator::enter(Phase phase, double t) {
  phase_ = phase;
  phase_start_ = t;
}

double ScriptedOperator::perceived_load(double t) const {
  // felt_ is a ring buffer; the oldest slot is exactly reaction_time old.
  const auto ticks = static_cast<std::size_t>(std::llround(t / plant_.tick));
  const double felt = felt_[(ticks + 1) % felt_.size()] * perception_bias_;
  return contact_threshold_ - felt * contact_threshold_ / vibration_gain_;
}

double ScriptedOperator::closing_activation(double speed) const {
  const double motor = plant_.motor_deadband + speed / plant_.aperture_gain;
  return std::clamp(activation_for_command(motor, flex_threshold_, plant_), 0.0, 1.0);
}

OperatorInput ScriptedOperator::with_tremor(OperatorInput input) {
  if (policy_.tremor_sigma > 0.0) {
    std::normal_distribution<double> tremor(0.0, policy_.tremor_sigma);
    if (input.flex > 0.0) input.flex = std::clamp(input.flex + tremor(rng_), 0.0, 1.0);
    if (input.ext > 0.0) input.ext = std::clamp(input.ext + tremor(rng_), 0.0, 1.0);
  }
  return input;
}

void ScriptedOperator::begin_attempt(const OperatorView& view) {
  ++attempts_started_;
  planned_force_ = policy_.target_force;
  if (policy_.overshoot_sigma > 0.0) {
    planned_force_ += std::normal_distribution<double>(0.0, policy_.overshoot_sigma)(rng_);
  }
  perception_bias_ = 1.0;
  if (policy_.uses_feedback && policy_.perception_sigma > 0.0) {
    perception_bias_ =
        std::exp(std::normal_distribution<double>(0.0, policy_.perception_sigma)(rng_));
  }
  demo_checked_ = false;
  demo_bad_ = false;
  airborne_start_ = -1.0;
  // Lifting the arm co-activates the wrist flexors now and then.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool burst = unit(rng_) < policy_.crosstalk_rate;
  crosstalk_level_ = burst ? kCrosstalkLow + (kCrosstalkHigh - kCrosstalkLow) * unit(rng_) : 0.0;
  crosstalk_onset_ = burst ? kCrosstalkOnset * unit(rng_) : 0.0;
  crosstalk_length_ = burst ? kCrosstalkShortest + kCrosstalkSpread * unit(rng_) : 0.0;
  enter(view.led ? Phase::Trigger : Phase::Approach, view.trial_time);
}

OperatorInput ScriptedOperator::next(const OperatorView& view) {
  const double t = view.trial_time;
  const auto ticks = static_cast<std::size_t>(std::llround(t / plant_.tick));
  felt_[ticks % felt_.size()] = view.felt_envelope;
  const double elapsed = t - phase_start_;
  const bool feedback = policy_.uses_feedback;
  const double felt_load = feedback ? perceived_load(t) : contact_threshold_;

  if (view.broken && phase_ != Phase::Abort && phase_ != Phase::Idle) enter(Phase::Abort, t);

  OperatorInput out;
  switch (phase_) {
    case Phase::Idle:
      break;

    case Phase::Abort:
      if (!view.broken) enter(Phase::Open, t);
      break;

    case Phase::Rest: {
      if (elapsed < kRestTime) break;
      if (!view.object_seated || view.aperture < plant_.object_width + kOpenClearance) {
        enter(Phase::Open, t);
        break;
      }
      const double needed = view.led ? kAutoTimeout - 2.0 + kStableTime + kLiftHold + 0.6
                                     : 0.4 + policy_.rise_time + kStableTime + kLiftHold + 0.6;
      if (view.time_remaining < needed) {
        enter(Phase::Idle, t);
        break;
      }
      begin_attempt(view);
      return next(view);
    }

    case Phase::Open:
      out.ext = kOpenActivation;
      if (view.object_seated && view.aperture >= plant_.object_width + kOpenClearance) {
        out.ext = 0.0;
        enter(Phase::Rest, t);
      }
      break;

    case Phase::Approach:
      if (view.contact || view.aperture <= plant_.object_width + kSlowZone) {
        // Internal model of the wall: squeeze to the aperture that yields the
        // planned force, at a speed that takes rise_time to get there.
        const double compression =
            std::clamp((planned_force_ - plant_.contact_preload()) / plant_.wall_stiffness(),
                       0.05, 2.0 * plant_.break_compression);
        const double distance = view.aperture - (plant_.object_width - compression);
        const double max_speed =
            plant_.aperture_gain * (plant_.motor_max - plant_.motor_deadband);
        const double speed = std::min(distance / policy_.rise_time, max_speed);
        squeeze_activation_ = closing_activation(speed);
        squeeze_end_ = t + distance / speed;
        enter(Phase::Squeeze, t);
        out.flex = squeeze_activation_;
      } else {
        out.flex = kApproachActivation;
      }
      break;

    case Phase::Squeeze:
      if (t >= squeeze_end_ || (feedback && felt_load <= kStopLoad)) {
        enter(Phase::Settle, t);
      } else {
        out.flex = squeeze_activation_;
      }
      break;

    case Phase::Settle:
      if (feedback && !view.led && view.contact && felt_load > kWeakLoad &&
          elapsed >= policy_.reaction_time) {
        enter(Phase::Correct, t);
      } else if (elapsed >= kStableTime) {
        enter(Phase::Lift, t);
        out.lift = 1.0;
      }
      break;

    case Phase::Correct:
      if (felt_load <= kAimLoad || !view.contact) {
        enter(Phase::Settle, t);
      } else {
        out.flex = closing_activation(policy_.correction_gain * (felt_load - kAimLoad));
      }
      break;

    case Phase::Lift:
      out.lift = 1.0;
      if (crosstalk_level_ > 0.0 && elapsed >= crosstalk_onset_ &&
          elapsed < crosstalk_onset_ + crosstalk_length_) {
        out.flex = crosstalk_level_;
      }
      if (view.airborne) {
        if (airborne_start_ < 0.0) airborne_start_ = t;
        const double held = t - airborne_start_;
        if (view.demonstrating && feedback && !demo_checked_ && held >= kDemoCheck) {
          demo_checked_ = true;
          demo_bad_ = felt_load < kDemoLow || felt_load > kDemoHigh;
        }
        // A demonstration that felt wrong is cancelled with the button once
        // the controller arms on it; the lift itself carries on.
        if (demo_bad_ && view.led) out.button = true;
        if (held >= kLiftHold) enter(Phase::Lower, t);
      } else if (airborne_start_ >= 0.0 || elapsed >= kLiftTimeout || !view.contact) {
        enter(Phase::Lower, t);
      }
      if (phase_ == Phase::Lower) out.lift = 0.0;
      break;

    case Phase::Lower:
      if (!view.airborne) {
        enter(Phase::Open, t);
        out.ext = kOpenActivation;
      }
      break;

    case Phase::Trigger:
      if (elapsed < kTriggerTime) {
        out.flex = kTriggerActivation;
      } else {
        enter(Phase::AutoWait, t);
      }
      break;

    case Phase::AutoWait:
      if (!view.autonomy_engaged || elapsed >= kAutoTimeout) {
        enter(Phase::Open, t);
      } else if (view.autonomy_settled) {
        enter(Phase::Settle, t);
      }
      break;
  }
  return with_tremor(out);
}

std::vector<double> tracking_assessment(std::span<const double> levels,
                                        std::span<const double> signal, double hold,
                                        double tick) {
  if (!(hold > 0.0) || !(tick > 0.0)) {
    throw std::invalid_argument("tracking_assessment: hold and tick must be > 0");
  }
  const auto window = static_cast<std::size_t>(std::llround(hold / tick));
  if (window == 0 || window * levels.size() > signal.size()) {
    throw std::invalid_argument("tracking_assessment: hold windows exceed the signal");
  }
  std::vector<double> rmse;
  rmse.reserve(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0)) {
      throw std::invalid_argument("tracking_assessment: levels must lie in (0, 1)");
    }
    double sum = 0.0;
    for (std::size_t k = i * window; k < (i + 1) * window; ++k) {
      const double d = signal[k] - levels[i];
      sum += d * d;
    }
    rmse.push_back(std::sqrt(sum / static_cast<double>(window)));
  }
  return rmse;
}

}  // namespace hsc
