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

#include "hsc/haptics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hsc {

void VibrationParams::validate() const {
  if (!(carrier > 0.0) || !(gain > 0.0) || !(contact_threshold > 0.0)) {
    throw std::invalid_argument("vibration: carrier, gain and contact_threshold must be > 0");
  }
  if (!(pulse_duration > 0.0) || pulse_count < 0) {
    throw std::invalid_argument("vibration: invalid pulse pattern");
  }
}

double vibration_amplitude(double load, const VibrationParams& params) {
  if (!(load < params.contact_threshold)) return 0.0;
  return params.gain * (params.contact_threshold - load) / params.contact_threshold;
}

double vibration_sample(double load, double t, const VibrationParams& params) {
  return vibration_amplitude(load, params) *
         std::sin(2.0 * std::numbers::pi * params.carrier * t);
}

double disable_pulse_envelope(double t_since_disable, const VibrationParams& params) {
  if (t_since_disable < 0.0 || t_since_disable >= params.pulse_pattern_length()) return 0.0;
  // Even slots are bursts, odd slots are gaps.
  const auto slot = static_cast<long>(std::floor(t_since_disable / params.pulse_duration));
  return slot % 2 == 0 ? params.gain : 0.0;
}

double disable_pulse(double t_since_disable, const VibrationParams& params) {
  const double envelope = disable_pulse_envelope(t_since_disable, params);
  if (envelope == 0.0) return 0.0;
  return envelope * std::sin(2.0 * std::numbers::pi * params.carrier * t_since_disable);
}

}  // namespace hsc
