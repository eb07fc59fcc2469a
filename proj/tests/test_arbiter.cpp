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

#include "doctest.h"
#include "hsc/arbiter.hpp"

using namespace hsc;

namespace {

PlantState held_object(double load) {
  const PlantParams p;
  PlantState s = initial_plant_state(p, 75.0);
  s.load_voltage = load;
  s.grip_force = (p.rest_voltage - load) / p.volts_per_newton;
  s.in_contact = true;
  s.airborne = true;
  s.airborne_since = 0.0;
  return s;
}

// Drives a clean one-second lift so the arbiter arms.
Arbiter armed(double load = 3.5) {
  Arbiter a(Group::SharedControl, PlantParams{}, ControllerParams{});
  PlantState s = held_object(load);
  for (int n = 0; n < 1000; ++n) {
    s.t = n * 0.001;
    a.step({}, s, {});
  }
  return a;
}

}  // namespace

TEST_CASE("sessions start per group") {
  const SessionMode st = reset_session(Group::Standard);
  CHECK_FALSE(st.feedback_enabled);
  CHECK(st.shared == SharedState::None);
  const SessionMode sc = reset_session(Group::SharedControl);
  CHECK(sc.shared == SharedState::Manual);
  CHECK_FALSE(sc.led);
  CHECK(sc.feedback_enabled);
  CHECK(reset_session(Group::Vibrotactile).feedback_enabled);
}

TEST_CASE("group and mode names round trip") {
  for (Group g : {Group::Standard, Group::Vibrotactile, Group::SharedControl}) {
    CHECK(parse_group(to_string(g)) == g);
  }
  CHECK(to_string(Group::Vibrotactile) == "vibro");
  CHECK_FALSE(parse_group("vibrotactile-ish").has_value());
  for (ModeTag m : {ModeTag::Standard, ModeTag::Vibro, ModeTag::Manual, ModeTag::Armed, ModeTag::Auto}) {
    CHECK(parse_mode_tag(to_string(m)) == m);
  }
}

TEST_CASE("one clean second of lift arms with the window mean") {
  Arbiter a = armed(3.5);
  CHECK(a.mode().shared == SharedState::Armed);
  CHECK(a.mode().led);
  CHECK_FALSE(a.mode().feedback_enabled);
  REQUIRE(a.autonomy().desired_grip.has_value());
  CHECK(*a.autonomy().desired_grip == doctest::Approx(3.5));
}

TEST_CASE("a short lift does not arm") {
  Arbiter a(Group::SharedControl, PlantParams{}, ControllerParams{});
  PlantState s = held_object(3.5);
  for (int n = 0; n < 999; ++n) a.step({}, s, {});
  CHECK(a.mode().shared == SharedState::Manual);
  s.airborne = false;
  for (int n = 0; n < 10; ++n) a.step({}, s, {});
  s.airborne = true;
  for (int n = 0; n < 999; ++n) a.step({}, s, {});
  CHECK(a.mode().shared == SharedState::Manual);
}

TEST_CASE("a slip during the demonstration spoils it until set-down") {
  Arbiter a(Group::SharedControl, PlantParams{}, ControllerParams{});
  const PlantState s = held_object(3.5);
  for (int n = 0; n < 500; ++n) a.step({}, s, {});
  a.step({}, s, {true, false, false});
  for (int n = 0; n < 1500; ++n) a.step({}, s, {});
  CHECK(a.mode().shared == SharedState::Manual);
  CHECK_FALSE(a.autonomy().desired_grip.has_value());
}

TEST_CASE("armed holds the motor until the trigger") {
  Arbiter a = armed();
  const PlantState s = held_object(3.5);
  ArbiterDecision d = a.step({0.05, 0.0, 1.0, false}, s, {});
  CHECK(a.mode().shared == SharedState::Armed);
  CHECK(d.motor == 0.0);
  d = a.step({0.5, 0.0, 1.0, false}, s, {});
  CHECK(a.mode().shared == SharedState::AutoActive);
  CHECK(d.transition == Transition::Engaged);
  CHECK(d.path == CommandPath::Autonomous);
  CHECK(a.autonomy().stage != Stage::Idle);
}

TEST_CASE("armed lets the operator open") {
  Arbiter a = armed();
  const ArbiterDecision d = a.step({0.0, 0.8, 0.0, false}, held_object(3.5), {});
  CHECK(d.motor < 0.0);
  CHECK(a.mode().shared == SharedState::Armed);
}

TEST_CASE("break while engaged disables and clears the desired grip") {
  Arbiter a = armed();
  const PlantState s = held_object(3.5);
  a.step({0.5, 0.0, 1.0, false}, s, {});
  REQUIRE(a.mode().shared == SharedState::AutoActive);
  const ArbiterDecision d = a.step({}, s, {false, true, false});
  CHECK(d.transition == Transition::Disabled);
  CHECK(d.cause == DisableCause::Break);
  CHECK(a.mode().shared == SharedState::Manual);
  CHECK_FALSE(a.mode().led);
  CHECK(a.mode().feedback_enabled);
  CHECK_FALSE(a.autonomy().desired_grip.has_value());
  CHECK(a.last_disable_time().has_value());
}

TEST_CASE("drop while armed disables") {
  Arbiter a = armed();
  const ArbiterDecision d = a.step({}, held_object(3.5), {false, false, true});
  CHECK(d.cause == DisableCause::Drop);
  CHECK(a.mode().shared == SharedState::Manual);
}

TEST_CASE("button is debounced") {
  Arbiter a = armed();
  const PlantState s = held_object(3.5);
  for (int n = 0; n < 30; ++n) a.step({0.0, 0.0, 1.0, true}, s, {});
  for (int n = 0; n < 10; ++n) a.step({0.0, 0.0, 1.0, false}, s, {});
  CHECK(a.mode().shared == SharedState::Armed);
  int disables = 0;
  for (int n = 0; n < 200; ++n) {
    disables += a.step({0.0, 0.0, 1.0, true}, s, {}).cause == DisableCause::Button;
  }
  CHECK(disables == 1);
  CHECK(a.mode().shared == SharedState::Manual);
}

TEST_CASE("opening intent ends an autonomous grasp and re-arms") {
  Arbiter a = armed();
  const PlantState s = held_object(3.5);
  a.step({0.5, 0.0, 1.0, false}, s, {});
  REQUIRE(a.mode().shared == SharedState::AutoActive);
  Transition last = Transition::None;
  for (int n = 0; n < 60 && last != Transition::Released; ++n) {
    last = a.step({0.0, 0.6, 0.0, false}, s, {}).transition;
  }
  CHECK(last == Transition::Released);
  CHECK(a.mode().shared == SharedState::Armed);
  CHECK(a.autonomy().desired_grip == doctest::Approx(3.5));
}

TEST_CASE("trial boundary abandons an engaged grasp") {
  Arbiter a = armed();
  a.step({0.5, 0.0, 1.0, false}, held_object(3.5), {});
  a.end_autonomous_grasp();
  CHECK(a.mode().shared == SharedState::Armed);
  CHECK(a.autonomy().desired_grip.has_value());
}

TEST_CASE("standard and vibro groups never arm") {
  for (Group g : {Group::Standard, Group::Vibrotactile}) {
    Arbiter a(g, PlantParams{}, ControllerParams{});
    const PlantState s = held_object(3.5);
    for (int n = 0; n < 3000; ++n) {
      const ArbiterDecision d = a.step({0.3, 0.0, 1.0, n % 100 < 50}, s, {n % 7 == 0, false, false});
      CHECK(d.motor == d.manual_command);
    }
    CHECK(a.mode().shared == SharedState::None);
    CHECK(a.mode() == reset_session(g));
  }
}
