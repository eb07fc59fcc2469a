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

// hsc: batch experiments, live sessions, fNIRS analysis and replay.
//
// Exit codes: 0 ok, 1 unexpected failure, 2 usage, 3 config, 4 I/O,
// 5 port in use.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "hsc/analysis.hpp"
#include "hsc/config.hpp"
#include "hsc/harness.hpp"
#include "hsc/server.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kConfig = 3, kIo = 4, kPortInUse = 5 };

struct Common {
  std::string config_path;
  std::optional<std::string> group;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "TOML parameter file");
  cmd->add_option("--group", c.group, "standard, vibro or shared")
      ->check(CLI::IsMember({"standard", "vibro", "shared"}));
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--out", c.out, "output directory");
}

hsc::ExperimentConfig resolve(const Common& c) {
  hsc::ExperimentConfig config;
  if (!c.config_path.empty()) config = hsc::load_config(c.config_path);
  if (c.group) config.group = *hsc::parse_group(*c.group);
  if (c.seed) config.seed = *c.seed;
  if (c.out) config.io.out_dir = *c.out;
  config.validate();
  return config;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw hsc::IoError("cannot read " + path.string());
  return in;
}

int cmd_run(const Common& c) {
  const hsc::ExperimentConfig config = resolve(c);
  const fs::path dir = config.io.out_dir;
  const hsc::ExperimentResult result = hsc::write_experiment(config, dir);
  int lifts = 0;
  std::size_t attempts = 0;
  for (const auto& t : result.trials) {
    lifts += t.lifts;
    attempts += t.attempts.size();
  }
  std::cout << result.session_id << ": " << result.trials.size() << " trials, " << attempts
            << " attempts, " << lifts << " lifts -> " << dir.string() << "\n";
  return kOk;
}

int cmd_serve(const Common& c, std::optional<int> port, std::optional<std::string> address,
              std::optional<double> speed) {
  hsc::ExperimentConfig config = resolve(c);
  config.io.live_mode = true;
  if (port) config.io.port = *port;
  if (address) config.io.listen_address = *address;
  if (speed) config.io.speed = *speed;
  config.validate();
  const fs::path dir = config.io.out_dir;
  fs::create_directories(dir);
  hsc::LiveServer server(config, dir);
  server.bind();
  std::cout << "listening on " << config.io.listen_address << ":" << server.port() << std::endl;
  server.run(true);
  std::cout << "stopped, output in " << dir.string() << "\n";
  return kOk;
}

int cmd_analyze(const Common& c, const std::string& in_path, const std::string& lifts_path,
                std::optional<std::string> session) {
  const hsc::ExperimentConfig config = resolve(c);
  auto fin = open_in(in_path);
  const hsc::OpticalRecording recording = hsc::read_fnirs_csv(fin);
  auto lin = open_in(lifts_path);
  const std::vector<hsc::TrialLifts> lifts = hsc::read_trials_csv(lin);

  std::string default_session;
  if (session) {
    default_session = *session;
  } else {
    std::set<std::string> ids;
    for (const auto& l : lifts) ids.insert(l.session_id);
    if (ids.size() == 1) default_session = *ids.begin();
  }

  std::vector<hsc::TrialWindow> windows;
  const auto& s = config.schedule;
  for (int k = 0; k < s.trials; ++k) {
    const double start = k * (s.trial_duration + s.break_duration);
    windows.push_back({start, start + s.trial_duration});
  }

  const hsc::AnalysisResult result =
      hsc::analyze(recording, lifts, windows, default_session, config.analysis);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";

  const fs::path dir = c.out ? fs::path(*c.out) : fs::path("analysis");
  fs::create_directories(dir);
  for (const auto& [name, writer] :
       {std::pair{"hemo.csv", &hsc::write_hemo_csv}, std::pair{"metrics.csv", &hsc::write_metrics_csv}}) {
    const fs::path path = dir / name;
    std::ofstream out(path);
    if (!out) throw hsc::IoError("cannot write " + path.string());
    writer(out, result);
    out.flush();
    if (!out) throw hsc::IoError("write failed: " + path.string());
  }
  std::cout << result.metrics.size() << " metric rows -> " << (dir / "metrics.csv").string()
            << "\n";
  return kOk;
}

int cmd_replay(const std::optional<std::string>& telemetry,
               const std::optional<std::string>& inputs, const std::optional<std::string>& out) {
  const fs::path run = telemetry ? *telemetry : *inputs;
  const fs::path dir = out ? fs::path(*out) : run / "replay";
  const auto trials = telemetry ? hsc::replay_telemetry(run, dir) : hsc::replay_inputs(run, dir);
  std::cout << "replayed " << trials.size() << " trials -> " << dir.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Haptic shared control simulator"};
  app.require_subcommand(1);

  Common run_opts, serve_opts, analyze_opts;
  auto* run = app.add_subcommand("run", "batch experiment with the scripted operator");
  add_common(run, run_opts);

  auto* serve = app.add_subcommand("serve", "live session over WebSocket");
  add_common(serve, serve_opts);
  std::optional<int> port;
  std::optional<std::string> address;
  std::optional<double> speed;
  serve->add_option("--port", port, "TCP port, 0 picks a free one")->check(CLI::Range(0, 65535));
  serve->add_option("--address", address, "listen address");
  serve->add_option("--speed", speed, "simulated seconds per wall second");

  auto* analyze = app.add_subcommand("analyze", "fNIRS pipeline");
  add_common(analyze, analyze_opts);
  std::string in_path, lifts_path;
  std::optional<std::string> session;
  analyze->add_option("--in", in_path, "fNIRS intensity CSV")->required();
  analyze->add_option("--lifts", lifts_path, "trials CSV from run")->required();
  analyze->add_option("--session", session, "session whose lifts pair with the recording");

  auto* replay = app.add_subcommand("replay", "re-derive outputs from a run directory");
  std::optional<std::string> telemetry, inputs, replay_out;
  auto* t_opt = replay->add_option("--telemetry", telemetry, "run directory, recompute metrics");
  auto* i_opt = replay->add_option("--inputs", inputs, "run directory, re-simulate from inputs");
  t_opt->excludes(i_opt);
  replay->add_option("--out", replay_out, "output directory");
  replay->callback([&] {
    if (!telemetry && !inputs) throw CLI::RequiredError("--telemetry or --inputs");
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*serve) return cmd_serve(serve_opts, port, address, speed);
    if (*analyze) return cmd_analyze(analyze_opts, in_path, lifts_path, session);
    if (*replay) return cmd_replay(telemetry, inputs, replay_out);
  } catch (const hsc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const hsc::PortInUseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPortInUse;
  } catch (const hsc::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
