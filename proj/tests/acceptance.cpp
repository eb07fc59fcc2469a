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

// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hsc/analysis.hpp"
#include "hsc/arbiter.hpp"
#include "hsc/autonomy.hpp"
#include "hsc/harness.hpp"
#include "hsc/haptics.hpp"
#include "hsc/plant.hpp"
#include "ws_client.hpp"

namespace fs = std::filesystem;
using namespace hsc;

namespace {

// Pinned tolerances and budgets.
constexpr double kEquationRelTol = 1e-9;
constexpr double kEquationBudget = 1.0;       // s
constexpr double kConvergeWithin = 3.0;       // s simulated, from the trigger
constexpr double kConvergeBudget = 10.0;      // s
constexpr double kDetectLatency = 0.025;      // s
constexpr int kSafetySequences = 10000;
constexpr int kSafetyTicks = 2500;
constexpr int kDemoTicks = 2000;
constexpr double kSafetyBudget = 30.0;        // s
constexpr double kReplicationBudget = 120.0;  // s
constexpr double kFirDcTol = 1e-6;
constexpr double kFirStopDb = -40.0;
constexpr double kMbllRelTol = 1e-9;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool rel_close(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

char buf[512];

// ---- 1 ----
Outcome equations() {
  const auto start = std::chrono::steady_clock::now();
  const VibrationParams vib;
  const ControllerParams c;
  int bad = 0, n = 0;
  auto check = [&](double got, double want) {
    ++n;
    if (!rel_close(got, want, kEquationRelTol)) ++bad;
  };
  check(vibration_amplitude(2.15, vib), 5.0);
  check(vibration_amplitude(3.0, vib), 10.0 * 1.3 / 4.3);
  check(vibration_amplitude(0.0, vib), 10.0);
  check(vibration_amplitude(4.5, vib), 0.0);
  check(vibration_amplitude(4.3, vib), 0.0);
  check(stage1_command(0.0, c), 2.5);
  check(stage1_command(std::log(10.0 / 3.0), c), 0.75);
  check(stage1_command(0.5, c), 2.5 * std::exp(-0.5));
  check(stage1_command(10.0, c), 0.75);
  check(stage2_command(0.0, c), 1.0);
  check(stage2_command(std::log(4.0), c), 4.0);
  check(stage2_command(0.7, c), std::exp(0.7));
  check(stage2_command(5.0, c), 4.0);
  AutoState s;
  s.desired_grip = 3.5;
  check(stage3_command(3.5, s, 0.001, c).command, 0.0);
  check(stage3_command(4.0, s, 0.001, c).command, 0.5);
  const std::vector<double> lifts{1, 2, 3}, hbt{3, 2, 1};
  const auto ne = neural_efficiency(lifts, hbt);
  check(ne[0], -std::numbers::sqrt2);
  check(ne[1], 0.0);
  check(ne[2], std::numbers::sqrt2);
  const double elapsed = seconds_since(start);
  std::snprintf(buf, sizeof buf, "%d/%d values within %.0e relative, %.3f s (budget %.0f s)",
                n - bad, n, kEquationRelTol, elapsed, kEquationBudget);
  return {bad == 0 && elapsed < kEquationBudget, buf};
}

// ---- 2 ----
Outcome convergence() {
  const auto start = std::chrono::steady_clock::now();
  const PlantParams plant;
  const ControllerParams c;
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> aperture(plant.object_width + 1.0, plant.max_aperture);
  int ok = 0, total = 0, breaks = 0;
  double worst = 0.0, worst_total = 0.0;
  for (double desired : {3.1, 3.3, 3.5, 3.7, 3.9}) {
    for (int k = 0; k < 20; ++k) {
      ++total;
      PlantState p = initial_plant_state(plant, aperture(rng));
      AutoState a;
      a.desired_grip = desired;
      a = start_autonomy(a, p.t);
      double contact_t = -1.0, settled_t = -1.0;
      for (int tick = 0; tick < 20000 && settled_t < 0.0; ++tick) {
        const AutonomyInputs in{p.load_voltage, p.aperture, -p.aperture_velocity};
        const AutonomyStep step = autonomy_step(a, in, p.t, plant.tick, c);
        a = step.state;
        if (contact_t < 0.0 && (a.stage == Stage::Stage3 || a.stage == Stage::Holding)) {
          contact_t = p.t;
        }
        p = step_plant(p, to_motor_volts(step.command, plant), 0.0, plant);
        if (p.broken) break;
        if (a.stage == Stage::Holding) settled_t = p.t;
      }
      // Keep holding for a second to be sure the grip stays in band.
      bool stays = settled_t >= 0.0;
      for (int tick = 0; tick < 1000 && stays; ++tick) {
        const AutonomyInputs in{p.load_voltage, p.aperture, -p.aperture_velocity};
        const AutonomyStep step = autonomy_step(a, in, p.t, plant.tick, c);
        a = step.state;
        p = step_plant(p, to_motor_volts(step.command, plant), 0.0, plant);
        if (p.broken || std::abs(p.load_voltage - desired) > c.settle_band * desired) stays = false;
      }
      if (p.broken) ++breaks;
      if (settled_t >= 0.0 && contact_t >= 0.0) {
        worst = std::max(worst, settled_t - contact_t);
        worst_total = std::max(worst_total, settled_t);
      }
      if (stays && !p.broken && contact_t >= 0.0 && settled_t < kConvergeWithin) ++ok;
    }
  }
  const double elapsed = seconds_since(start);
  std::snprintf(buf, sizeof buf,
                "%d/%d settled, %d breaks, worst %.3f s from contact, %.3f s from trigger, "
                "%.2f s (budget %.0f s)",
                ok, total, breaks, worst, worst_total, elapsed, kConvergeBudget);
  return {ok == total && breaks == 0 && elapsed < kConvergeBudget, buf};
}

// ---- 3 ----
// First tick at which the detector reports `want` on a ramp of `slope` V/s
// starting at t0, or -1.
double detection_delay(double slope, LoadEvent want, bool* wrong) {
  const ControllerParams c;
  const double dt = 0.001;
  const auto window = static_cast<std::size_t>(std::llround(c.slope_window / dt)) + 1;
  const int onset = 200;
  std::vector<double> loads;
  for (int n = 0; n < 600; ++n) {
    loads.push_back(n < onset ? 3.2 : 3.2 + slope * (n - onset) * dt);
  }
  *wrong = false;
  double found = -1.0;
  for (std::size_t n = window - 1; n < loads.size(); ++n) {
    const std::span<const double> hist(loads.data() + n + 1 - window, window);
    const LoadEvent e = detect_slip_break(hist, dt, c);
    if (e != LoadEvent::None && e != want) *wrong = true;
    if (e == want && found < 0.0) found = (static_cast<int>(n) - onset) * dt;
  }
  return found;
}

Outcome detector() {
  bool wrong3 = false, wrong6 = false, wrong_neg = false;
  const double d3 = detection_delay(3.0, LoadEvent::Slip, &wrong3);
  const double d6 = detection_delay(6.0, LoadEvent::Break, &wrong6);
  // Any non-None classification on the descending ramp sets wrong_neg.
  detection_delay(-6.0, LoadEvent::None, &wrong_neg);
  const bool slip_ok = d3 >= 0.0 && d3 <= kDetectLatency && !wrong3;
  const bool break_ok = d6 >= 0.0 && d6 <= kDetectLatency;
  const bool none_ok = !wrong_neg;
  std::snprintf(buf, sizeof buf, "+3 V/s slip after %.0f ms, +6 V/s break after %.0f ms, "
                "-6 V/s %s (limit %.0f ms)",
                d3 * 1000.0, d6 * 1000.0, wrong_neg ? "fired" : "silent", kDetectLatency * 1000.0);
  return {slip_ok && break_ok && none_ok, buf};
}

// ---- 4 ----
struct SafetyStats {
  long ticks = 0;
  long violations = 0;
  long armed = 0;
  long engaged = 0;
  long disables = 0;
  std::string first;
};

void run_sequence(Group group, std::mt19937_64& rng, SafetyStats& stats) {
  const PlantParams plant;
  const ControllerParams c;
  Arbiter arb(group, plant, c);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> hold(1, 400);

  // Half the sequences start with a clean demonstration so the armed and
  // engaged states are exercised, the rest are random from the first tick.
  bool demo = group == Group::SharedControl && u(rng) < 0.5;
  PlantState p = initial_plant_state(plant, demo ? 75.5 : plant.max_aperture);
  OperatorInput in;
  int remaining = 0;
  auto violate = [&](const char* what) {
    if (stats.violations++ == 0) stats.first = what;
  };
  for (int tick = 0; tick < kSafetyTicks; ++tick) {
    if (demo && (tick >= kDemoTicks || arb.mode().shared == SharedState::Armed)) demo = false;
    if (demo) {
      in = {};
      if (p.load_voltage > 3.6 && !p.airborne) in.flex = 0.2;
      if (p.load_voltage <= 3.6 || p.airborne) in.lift = 1.0;
    } else if (remaining-- <= 0) {
      remaining = hold(rng);
      in.flex = u(rng) < 0.3 ? 0.0 : u(rng);
      in.ext = u(rng) < 0.6 ? 0.0 : u(rng);
      in.lift = u(rng) < 0.5 ? 0.0 : 1.0;
      in.button = u(rng) < 0.1;
    }
    LoadEvents ev;
    if (!demo) {
      ev.slip = u(rng) < 0.002;
      ev.brk = u(rng) < 0.001;
      ev.drop = u(rng) < 0.001;
    }
    const bool had_grip = arb.autonomy().desired_grip.has_value();
    const ArbiterDecision d = arb.step(in, p, ev);
    const SessionMode& m = arb.mode();
    ++stats.ticks;

    if (m.shared == SharedState::AutoActive && !arb.autonomy().desired_grip) {
      violate("AutoActive without desired grip");
    }
    if (group == Group::SharedControl) {
      if (m.feedback_enabled == m.led) violate("feedback and LED not exclusive");
      if ((m.shared == SharedState::Manual) != m.feedback_enabled) violate("manual/feedback mismatch");
    } else {
      if (m.shared != SharedState::None || m.led) violate("non-shared group entered shared state");
      if (m.feedback_enabled != (group == Group::Vibrotactile)) violate("feedback flag wrong for group");
    }
    if (d.path == CommandPath::Autonomous) {
      if (d.motor != d.auto_command || m.shared != SharedState::AutoActive) {
        violate("autonomous path not in sole control");
      }
    } else {
      if (d.auto_command != 0.0) violate("manual path with autonomous output");
      if (d.motor != d.manual_command && d.motor != std::min(0.0, d.manual_command)) {
        violate("manual path motor differs from manual command");
      }
      if (m.shared == SharedState::AutoActive) violate("AutoActive on manual path");
    }
    if (d.transition == Transition::Disabled) {
      ++stats.disables;
      if (arb.autonomy().desired_grip || m.shared != SharedState::Manual || m.led) {
        violate("disable left desired grip or mode set");
      }
    }
    if (!had_grip && arb.autonomy().desired_grip && d.transition != Transition::Armed) {
      violate("desired grip set outside a capture");
    }
    if (d.transition == Transition::Armed) ++stats.armed;
    if (d.transition == Transition::Engaged) ++stats.engaged;
    if (std::abs(d.motor) > plant.motor_max) violate("motor beyond range");

    p = step_plant(p, d.motor, in.lift, plant);
    if (p.broken) p = reset_object(p, plant);
  }
}

Outcome safety() {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = true;
  for (Group g : {Group::Standard, Group::Vibrotactile, Group::SharedControl}) {
    std::mt19937_64 rng(0x5afe + static_cast<int>(g));
    SafetyStats stats;
    for (int s = 0; s < kSafetySequences; ++s) run_sequence(g, rng, stats);
    pass = pass && stats.violations == 0;
    std::snprintf(buf, sizeof buf, "%s%s %ld violations", detail.empty() ? "" : "; ",
                  std::string(to_string(g)).c_str(), stats.violations);
    detail += buf;
    if (g == Group::SharedControl) {
      std::snprintf(buf, sizeof buf, " (%ld arms, %ld engages, %ld disables)", stats.armed,
                    stats.engaged, stats.disables);
      detail += buf;
    }
    if (stats.violations) detail += " first: " + stats.first;
  }
  const double elapsed = seconds_since(start);
  std::snprintf(buf, sizeof buf, "; %d sequences x %d ticks per group, %.1f s (budget %.0f s)",
                kSafetySequences, kSafetyTicks, elapsed, kSafetyBudget);
  detail += buf;
  return {pass && elapsed < kSafetyBudget, detail};
}

// ---- 5 ----
Outcome replication() {
  const auto start = std::chrono::steady_clock::now();
  double margin_n[3] = {}, margin_k[3] = {};
  double lift_p[3] = {};
  for (Group g : {Group::Standard, Group::Vibrotactile, Group::SharedControl}) {
    double attempts = 0, lifted = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      ExperimentConfig config;
      config.group = g;
      config.seed = seed;
      const ExperimentResult r = run_experiment(config, {}, false);
      for (const auto& t : r.trials) {
        for (const auto& a : t.attempts) {
          const int mode = static_cast<int>(a.mode);
          margin_n[mode] += 1;
          margin_k[mode] += a.in_margin;
          attempts += 1;
          lifted += a.lifted;
        }
      }
    }
    lift_p[static_cast<int>(g)] = lifted / attempts;
  }
  const double nf = margin_k[0] / margin_n[0];
  const double fb = margin_k[1] / margin_n[1];
  const double au = margin_k[2] / margin_n[2];
  const double elapsed = seconds_since(start);
  const bool margin_order = au > fb && fb > nf;
  const bool lift_order = lift_p[2] > lift_p[1] && lift_p[1] >= lift_p[0];
  std::snprintf(buf, sizeof buf,
                "in-margin autonomous %.3f > feedback %.3f > no-feedback %.3f %s; lift "
                "probability shared %.3f > vibro %.3f >= standard %.3f %s; %.1f s (budget %.0f s)",
                au, fb, nf, margin_order ? "holds" : "FAILS", lift_p[2], lift_p[1], lift_p[0],
                lift_order ? "holds" : "FAILS", elapsed, kReplicationBudget);
  return {margin_order && lift_order && elapsed < kReplicationBudget, buf};
}

// ---- 6 ----
Outcome fir() {
  const auto h = design_fir(40, 0.1, 10.0);
  double dc = 0.0;
  for (double v : h) dc += v;
  bool symmetric = h.size() == 41;
  for (std::size_t k = 0; k < h.size(); ++k) symmetric = symmetric && h[k] == h[h.size() - 1 - k];
  const double db = 20.0 * std::log10(fir_magnitude(h, 1.0, 10.0));
  std::snprintf(buf, sizeof buf, "DC gain %.12f, symmetry %s, %.1f dB at 1 Hz (need <= %.0f)", dc,
                symmetric ? "exact" : "broken", db, kFirStopDb);
  return {std::abs(dc - 1.0) <= kFirDcTol && symmetric && db <= kFirStopDb, buf};
}

// ---- 7 ----
Outcome mbll_round_trip() {
  const MbllParams params;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> conc(-5.0, 5.0), base(100.0, 5000.0);
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const double hbo = conc(rng), hbr = conc(rng);
    const std::array<double, 2> i0{base(rng), base(rng)};
    const HemoSample s = mbll_sample(forward_intensity(hbo, hbr, i0, params), i0, params);
    worst = std::max({worst, std::abs(s.hbo - hbo) / std::max(1.0, std::abs(hbo)),
                      std::abs(s.hbr - hbr) / std::max(1.0, std::abs(hbr))});
  }
  const HemoSample unit = mbll_sample(forward_intensity(1.0, 1.0, {1000.0, 1000.0}, params),
                                      {1000.0, 1000.0}, params);
  const HemoSample zero = mbll_sample({812.5, 1234.0}, {812.5, 1234.0}, params);
  const bool unit_ok = rel_close(unit.hbo, 1.0, kMbllRelTol) &&
                       rel_close(unit.hbr, 1.0, kMbllRelTol) && rel_close(unit.hbt, 2.0, kMbllRelTol);
  const bool zero_ok = zero.hbo == 0.0 && zero.hbr == 0.0 && zero.hbt == 0.0;
  std::snprintf(buf, sizeof buf, "worst relative error %.2e over 1000 draws, unit %s, I=I0 %s", worst,
                unit_ok ? "recovered" : "wrong", zero_ok ? "exactly zero" : "nonzero");
  return {worst <= kMbllRelTol && unit_ok && zero_ok, buf};
}

// ---- 8 ----
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "hsc_acceptance";
  fs::remove_all(root);
  ExperimentConfig config;
  config.group = Group::SharedControl;
  config.seed = 7;
  write_experiment(config, root / "a");
  write_experiment(config, root / "b");
  replay_telemetry(root / "a", root / "replay");

  bool batch_same = true, replay_same = true;
  for (const char* f : {"attempts.csv", "trials.csv"}) {
    const std::string a = read_file(root / "a" / f);
    batch_same = batch_same && !a.empty() && a == read_file(root / "b" / f);
    replay_same = replay_same && a == read_file(root / "replay" / f);
  }
  for (int k = 1; k <= config.schedule.trials; ++k) {
    batch_same = batch_same && read_file(telemetry_path(root / "a", k)) ==
                                   read_file(telemetry_path(root / "b", k));
  }

  // Live session with a few scripted inputs, then an abrupt disconnect.
  ExperimentConfig live = config;
  live.io.speed = 10.0;
  bool live_same = false;
  std::size_t live_rows = 0;
  try {
    {
      testing::ServerThread server(live, root / "live");
      testing::WsClient client(server.port());
      const struct {
        double flex, ext, lift;
        bool button;
        int wall_ms;
      } script[] = {{0.0, 0.0, 0.0, false, 50},  {0.15, 0.0, 0.0, false, 250},
                    {0.15, 0.0, 0.0, false, 30}, {0.0, 0.0, 1.0, false, 150},
                    {0.0, 0.0, 1.0, true, 20},   {0.0, 0.0, 1.0, false, 40},
                    {0.6, 0.0, 1.0, false, 60},  {0.0, 0.5, 0.0, false, 120},
                    {0.3, 0.1, 0.0, false, 80}};
      for (const auto& s : script) {
        client.input(s.flex, s.ext, s.lift, s.button);
        client.wait_for([](const auto&) { return false; }, std::chrono::milliseconds(s.wall_ms));
      }
      client.drop();
      std::this_thread::sleep_for(std::chrono::milliseconds(200));
      server.stop();
    }
    replay_inputs(root / "live", root / "live_replay");
    const std::string rec = read_file(telemetry_path(root / "live", 1));
    live_same = !rec.empty() && rec == read_file(telemetry_path(root / "live_replay", 1));
    live_rows = static_cast<std::size_t>(std::count(rec.begin(), rec.end(), '\n'));
  } catch (const std::exception& e) {
    std::snprintf(buf, sizeof buf, "live session failed: %s", e.what());
    return {false, buf};
  }
  std::snprintf(buf, sizeof buf,
                "batch reruns %s; telemetry replay metrics %s; live input replay telemetry %s "
                "(%zu rows)",
                batch_same ? "byte-identical" : "DIFFER", replay_same ? "byte-identical" : "DIFFER",
                live_same ? "byte-identical" : "DIFFERS", live_rows);
  fs::remove_all(root);
  return {batch_same && replay_same && live_same, buf};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"equation fidelity", equations},
      {"PI grasp convergence", convergence},
      {"detector thresholds", detector},
      {"state-machine safety", safety},
      {"directional replication", replication},
      {"FIR correctness", fir},
      {"MBLL round trip", mbll_round_trip},
      {"determinism and replay", determinism},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %d %s: %s: %s\n", index, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
