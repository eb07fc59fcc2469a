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

namespace hsc {

/// Vibrotactile tactor drive.
struct VibrationParams {
  double carrier = 250.0;           // Hz
  double gain = 10.0;               // V, envelope at zero load voltage
  double contact_threshold = 4.3;   // V
  double pulse_duration = 0.15;     // s, each burst and each gap
  int pulse_count = 2;

  void validate() const;
  /// Bursts plus their trailing gaps.
  double pulse_pattern_length() const { return 2.0 * pulse_duration * pulse_count; }
};

/// Envelope of the force-proportional vibration. Silent at or above the
/// contact threshold.
double vibration_amplitude(double load, const VibrationParams& params);

/// Instantaneous tactor voltage at time t.
double vibration_sample(double load, double t, const VibrationParams& params);

/// Disable cue: `pulse_count` full-gain carrier bursts, then silence.
double disable_pulse(double t_since_disable, const VibrationParams& params);

/// Envelope of disable_pulse (gain inside a burst, 0 otherwise).
double disable_pulse_envelope(double t_since_disable, const VibrationParams& params);

}  // namespace hsc
