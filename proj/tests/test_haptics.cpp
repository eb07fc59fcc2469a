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

#include <stdexcept>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "hsc/haptics.hpp"

using namespace hsc;

TEST_CASE("vibration envelope values") {
  const VibrationParams v;
  CHECK(vibration_amplitude(4.5, v) == 0.0);
  CHECK(vibration_amplitude(4.3, v) == 0.0);
  CHECK(vibration_amplitude(2.15, v) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(vibration_amplitude(3.0, v) == doctest::Approx(3.0232558139534884).epsilon(1e-12));
  CHECK(vibration_amplitude(0.0, v) == doctest::Approx(10.0));
  // peak of the carrier at a quarter period
  CHECK(vibration_sample(0.0, 0.001, v) == doctest::Approx(10.0).epsilon(1e-9));
  for (double t = 0.0; t < 0.02; t += 0.0001) CHECK(vibration_sample(4.3, t, v) == 0.0);
}

TEST_CASE("property: envelope is linear below the threshold and bounds the carrier") {
  const VibrationParams v;
  for (double l = 0.0; l < 4.29; l += 0.01) {
    CHECK(vibration_amplitude(l + 0.01, v) < vibration_amplitude(l, v));
    CHECK(vibration_amplitude(l, v) == doctest::Approx(10.0 * (4.3 - l) / 4.3));
    for (double t = 0.0; t < 0.008; t += 0.0003) {
      CHECK(std::abs(vibration_sample(l, t, v)) <= vibration_amplitude(l, v) + 1e-12);
    }
  }
}

TEST_CASE("disable pulse pattern") {
  const VibrationParams v;
  CHECK(disable_pulse_envelope(0.05, v) == v.gain);
  CHECK(disable_pulse(0.051, v) != 0.0);
  CHECK(disable_pulse_envelope(0.2, v) == 0.0);
  CHECK(disable_pulse(0.2, v) == 0.0);
  CHECK(disable_pulse_envelope(0.35, v) == v.gain);
  CHECK(disable_pulse_envelope(0.55, v) == 0.0);
  for (double t = 0.6; t < 3.0; t += 0.01) CHECK(disable_pulse(t, v) == 0.0);
  CHECK(v.pulse_pattern_length() == doctest::Approx(0.6));
}

TEST_CASE("vibration parameter validation") {
  VibrationParams v;
  CHECK_NOTHROW(v.validate());
  v.carrier = 0.0;
  CHECK_THROWS_AS(v.validate(), std::invalid_argument);
  v = {};
  v.gain = -1.0;
  CHECK_THROWS_AS(v.validate(), std::invalid_argument);
}
