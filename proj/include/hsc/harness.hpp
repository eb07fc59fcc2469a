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

#include <filesystem>
#include <functional>
#include <memory>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hsc/config.hpp"
#include "hsc/session.hpp"
#include "hsc/telemetry.hpp"

namespace hsc {

enum class GraspMode { NoFeedback, Feedback, Autonomous };

std::string_view to_string(GraspMode mode);
GraspMode grasp_mode(ModeTag tag);

struct AttemptRecord {
  int trial = 0;
  int index = 0;                    // 1-based within the trial
  double start_t = 0.0;
  double end_t = 0.0;
  double min100_mean = 0.0;
  bool in_margin = false;
  bool lifted = false;
  double airborne_duration = 0.0;   // longest continuous airborne run, s
  bool broke = false;
  GraspMode mode = GraspMode::NoFeedback;
};

struct TrialRecord {
  int trial_index = 0;
  int lifts = 0;
  int breaks = 0;
  std::vector<AttemptRecord> attempts;
};

struct SegmentParams {
  double tick = 0.001;
  double contact_threshold = 4.3;
  double close_after = 0.1;         // s without contact that ends an attempt
  double lift_criterion = 3.0;
  double margin_low = 3.0;
  double margin_high = 4.0;
  std::size_t smallest = 100;
};

/// Splits a trial's telemetry into grasp attempts and fills in their
/// metrics. Contact means L below the threshold on an intact object; the
/// tick an object breaks still counts and closes its attempt. Throws
/// std::invalid_argument if time does not increase.
std::vector<AttemptRecord> segment_attempts(std::span<const TelemetryRow> rows,
                                            const SegmentParams& params, int trial = 0);

TrialRecord summarize_trial(int trial, std::span<const TelemetryRow> rows,
                            const SegmentParams& params);

SegmentParams segment_params(const ExperimentConfig& config);

/// Supplies one input per tick from what the operator can see.
using InputSource = std::function<InputSample(const OperatorView&)>;

struct TrialRun {
  TrialRecord record;
  std::vector<TelemetryRow> telemetry;
  std::vector<InputSample> inputs;
};

/// One trial on an existing session: resets the trial, then steps for the
/// scheduled duration.
TrialRun run_trial(Session& session, const InputSource& source, int trial_index,
                   const ExperimentConfig& config, bool keep_telemetry = true);

struct ExperimentResult {
  std::string session_id;
  std::vector<TrialRecord> trials;
  std::vector<double> tracking_rmse;
};

/// Called after each trial with its full record, telemetry and inputs.
using TrialSink = std::function<void(const TrialRun&)>;

/// Training (MVC tracking assessment) followed by the scheduled trials with
/// the scripted operator.
ExperimentResult run_experiment(const ExperimentConfig& config, const TrialSink& sink = {},
                                bool keep_telemetry = true);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_attempts_csv(std::ostream& out, const std::string& session_id, Group group,
                        std::span<const TrialRecord> trials);
void write_trials_csv(std::ostream& out, const std::string& session_id, Group group,
                      std::span<const TrialRecord> trials);

std::filesystem::path telemetry_path(const std::filesystem::path& dir, int trial);
std::filesystem::path inputs_path(const std::filesystem::path& dir, int trial);

/// Streams one trial's telemetry and inputs to disk as it is produced.
class TrialWriter {
 public:
  TrialWriter(const std::filesystem::path& dir, int trial);
  ~TrialWriter();
  TrialWriter(const TrialWriter&) = delete;
  TrialWriter& operator=(const TrialWriter&) = delete;

  void add(std::int64_t tick, const InputSample& input, const TelemetryRow& row);
  /// Flushes and closes; throws IoError on a failed write.
  void finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Runs the experiment and writes attempts.csv, trials.csv, assessment.csv,
/// session.json and per-trial telemetry, input and event logs. Throws
/// IoError naming the file on failure.
ExperimentResult write_experiment(const ExperimentConfig& config, const std::filesystem::path& dir);

/// Writes the summary files (attempts, trials, session.json) for a finished
/// run; shared by batch, live and replay paths.
void write_summary(const ExperimentConfig& config, std::span<const TrialRecord> trials,
                   const std::filesystem::path& dir);

/// Reads session.json from a run directory.
ExperimentConfig read_session_config(const std::filesystem::path& dir);

/// Re-derives attempts.csv and trials.csv from the telemetry logs in `run`
/// and writes them to `out`.
std::vector<TrialRecord> replay_telemetry(const std::filesystem::path& run,
                                          const std::filesystem::path& out);

/// Re-simulates every trial from the recorded inputs in `run`, writing
/// telemetry, inputs and summaries to `out`.
std::vector<TrialRecord> replay_inputs(const std::filesystem::path& run,
                                       const std::filesystem::path& out);

}  // namespace hsc
