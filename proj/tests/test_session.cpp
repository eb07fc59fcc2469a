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

#include "doctest.h"
#include "hsc/config.hpp"
#include "hsc/harness.hpp"
#include "hsc/session.hpp"

using namespace hsc;

TEST_CASE("event names round trip") {
  CHECK(format_events(0) == "");
  CHECK(format_events(event::kSlip | event::kDisable) == "slip|disable");
  for (std::uint16_t bits = 0; bits <= event::kAll; bits += 37) {
    CHECK(parse_events(format_events(bits)) == bits);
  }
  CHECK(parse_events("") == 0);
  CHECK_THROWS_AS(parse_events("slip|explode"), std::invalid_argument);
  CHECK(event_names(event::kBreak | event::kDrop).size() == 2);
}

TEST_CASE("rows advance by one tick") {
  Session s(Group::Vibrotactile, SessionParams{});
  for (int n = 0; n < 500; ++n) {
    const TelemetryRow r = s.step({0.3, 0.0, 0.0, false});
    CHECK(r.t == doctest::Approx((n + 1) * 0.001).epsilon(1e-12));
    CHECK(r.mode == ModeTag::Vibro);
  }
  CHECK(s.tick() == 500);
  s.begin_trial();
  CHECK(s.tick() == 0);
  CHECK(s.plant().aperture == s.params().plant.max_aperture);
}

TEST_CASE("safety stop forces the motor off") {
  Session s(Group::Standard, SessionParams{});
  for (int n = 0; n < 100; ++n) s.step({1.0, 0.0, 0.0, false});
  const TelemetryRow r = s.step({1.0, 0.0, 0.0, false}, true);
  CHECK(r.motor == 0.0);
  CHECK(r.flex == 0.0);
  CHECK((r.events & event::kSafetyStop) != 0);
}

TEST_CASE("invalid input is rejected") {
  Session s(Group::Standard, SessionParams{});
  CHECK_THROWS_AS(s.step({1.5, 0.0, 0.0, false}), std::invalid_argument);
}

TEST_CASE("vibration follows the load only with feedback on") {
  for (Group g : {Group::Standard, Group::Vibrotactile}) {
    Session s(g, SessionParams{});
    TelemetryRow r;
    for (int n = 0; n < 3000; ++n) {
      r = s.step({0.25, 0.0, 0.0, false});
      if (r.load < 3.8) break;
    }
    REQUIRE(r.load < 4.3);
    if (g == Group::Standard) {
      CHECK(r.envelope == 0.0);
    } else {
      CHECK(r.envelope == doctest::Approx(10.0 * (4.3 - r.load) / 4.3));
    }
  }
}

TEST_CASE("break is reported once and the object comes back") {
  SessionParams params;
  Session s(Group::Standard, params);
  int breaks = 0, resets = 0;
  for (int n = 0; n < 5000; ++n) {
    const TelemetryRow r = s.step({n < 2500 ? 0.6 : 0.0, n < 2500 ? 0.0 : 0.6, 0.0, false});
    breaks += (r.events & event::kBreak) != 0;
    resets += (r.events & event::kObjectReset) != 0;
  }
  CHECK(breaks == 1);
  CHECK(resets == 1);
  CHECK_FALSE(s.plant().broken);
}

TEST_CASE("button while engaged disables with a pulse") {
  ExperimentConfig config;
  config.group = Group::SharedControl;
  Session s(config.group, config.session_params());
  // manual demonstration: close gently, lift, hold
  TelemetryRow r;
  int n = 0;
  for (; n < 8000 && r.mode != ModeTag::Armed; ++n) {
    const bool gripping = s.plant().load_voltage < 3.7 || s.plant().airborne;
    r = s.step({gripping ? 0.0 : 0.2, 0.0, gripping ? 1.0 : 0.0, false});
  }
  REQUIRE(r.mode == ModeTag::Armed);
  CHECK(r.led);
  CHECK((r.events & event::kArmed) != 0);
  r = s.step({0.5, 0.0, 1.0, false});
  CHECK(r.mode == ModeTag::Auto);
  CHECK((r.events & event::kAutoOn) != 0);
  bool disabled = false;
  for (int k = 0; k < 100 && !disabled; ++k) {
    r = s.step({0.0, 0.0, 1.0, true});
    disabled = r.events & event::kDisable;
  }
  CHECK(disabled);
  CHECK(r.mode == ModeTag::Manual);
  CHECK_FALSE(r.led);
  r = s.step({0.0, 0.0, 1.0, false});
  CHECK(r.envelope == doctest::Approx(config.vibration.gain));
}

TEST_CASE("operator view reflects the session") {
  Session s(Group::SharedControl, SessionParams{});
  const OperatorView v = s.view(60.0);
  CHECK(v.time_remaining == 60.0);
  CHECK(v.demonstrating);
  CHECK_FALSE(v.led);
  CHECK(v.object_seated);
}
