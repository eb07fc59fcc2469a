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

#include "hsc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace hsc {

std::string_view to_string(GraspMode mode) {
  switch (mode) {
    case GraspMode::NoFeedback: return "no_feedback";
    case GraspMode::Feedback: return "feedback";
    case GraspMode::Autonomous: return "autonomous";
  }
  return "no_feedback";
}

GraspMode grasp_mode(ModeTag tag) {
  switch (tag) {
    case ModeTag::Standard: return GraspMode::NoFeedback;
    case ModeTag::Vibro:
    case ModeTag::Manual: return GraspMode::Feedback;
    case ModeTag::Armed:
    case ModeTag::Auto: return GraspMode::Autonomous;
  }
  return GraspMode::NoFeedback;
}

namespace {

AttemptRecord measure(std::span<const TelemetryRow> rows, std::size_t first, std::size_t last,
                      bool broke, const SegmentParams& p,
                      const std::vector<char>& contact, std::vector<double>& scratch) {
  AttemptRecord a;
  a.start_t = rows[first].t;
  a.end_t = rows[last].t + p.tick;
  a.broke = broke;
  a.mode = grasp_mode(rows[first].mode);

  scratch.clear();
  std::int64_t run = 0;
  std::int64_t longest = 0;
  for (std::size_t i = first; i <= last; ++i) {
    if (contact[i]) scratch.push_back(rows[i].load);
    run = rows[i].airborne ? run + 1 : 0;
    longest = std::max(longest, run);
  }
  const std::size_t k = std::min(p.smallest, scratch.size());
  std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k),
                    scratch.end());
  a.min100_mean = std::accumulate(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k),
                                  0.0) /
                  static_cast<double>(k);
  a.in_margin = a.min100_mean >= p.margin_low && a.min100_mean <= p.margin_high;
  a.airborne_duration = static_cast<double>(longest) * p.tick;
  a.lifted = longest >= std::llround(p.lift_criterion / p.tick);
  return a;
}

}  // namespace

std::vector<AttemptRecord> segment_attempts(std::span<const TelemetryRow> rows,
                                            const SegmentParams& p, int trial) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].t > rows[i - 1].t)) {
      throw std::invalid_argument("segment_attempts: time is not increasing at row " +
                                  std::to_string(i));
    }
  }
  std::vector<char> contact(rows.size());
  std::vector<char> break_edge(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    break_edge[i] = rows[i].broken && (i == 0 || !rows[i - 1].broken);
    contact[i] = rows[i].load < p.contact_threshold && (!rows[i].broken || break_edge[i]);
  }

  const auto gap = std::llround(p.close_after / p.tick);
  std::vector<AttemptRecord> out;
  std::vector<double> scratch;
  bool open = false;
  std::size_t first = 0;
  std::size_t last_contact = 0;
  auto close = [&](bool broke) {
    AttemptRecord a = measure(rows, first, last_contact, broke, p, contact, scratch);
    a.trial = trial;
    a.index = static_cast<int>(out.size()) + 1;
    out.push_back(a);
    open = false;
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (contact[i]) {
      if (!open) {
        open = true;
        first = i;
      }
      last_contact = i;
      if (break_edge[i]) close(true);
    } else if (open && static_cast<std::int64_t>(i - last_contact) >= gap) {
      close(false);
    }
  }
  if (open) close(false);
  return out;
}

TrialRecord summarize_trial(int trial, std::span<const TelemetryRow> rows,
                            const SegmentParams& params) {
  TrialRecord r;
  r.trial_index = trial;
  r.attempts = segment_attempts(rows, params, trial);
  r.lifts = static_cast<int>(std::count_if(r.attempts.begin(), r.attempts.end(),
                                           [](const AttemptRecord& a) { return a.lifted; }));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].broken && (i == 0 || !rows[i - 1].broken)) ++r.breaks;
  }
  return r;
}

SegmentParams segment_params(const ExperimentConfig& config) {
  SegmentParams p;
  p.tick = config.plant.tick;
  p.contact_threshold = config.plant.contact_voltage;
  p.lift_criterion = config.schedule.lift_criterion;
  return p;
}

TrialRun run_trial(Session& session, const InputSource& source, int trial_index,
                   const ExperimentConfig& config, bool keep_telemetry) {
  session.begin_trial();
  const auto ticks = std::llround(config.schedule.trial_duration / config.plant.tick);
  TrialRun run;
  if (keep_telemetry) {
    run.telemetry.reserve(static_cast<std::size_t>(ticks));
    run.inputs.reserve(static_cast<std::size_t>(ticks));
  }
  std::vector<TelemetryRow> rows;
  std::vector<TelemetryRow>& sink = keep_telemetry ? run.telemetry : rows;
  sink.reserve(static_cast<std::size_t>(ticks));
  for (std::int64_t n = 0; n < ticks; ++n) {
    const InputSample in = source(session.view(config.schedule.trial_duration));
    sink.push_back(session.step(in.input, in.safety_stop));
    if (keep_telemetry) run.inputs.push_back(in);
  }
  run.record = summarize_trial(trial_index, sink, segment_params(config));
  return run;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const TrialSink& sink,
                                bool keep_telemetry) {
  config.validate();
  ExperimentResult result;
  result.session_id = config.session_id();

  // Training: the MVC tracking assessment. It draws from its own stream so
  // changing the schedule does not perturb the trials.
  {
    const PolicyParams policy = config.operator_policy();
    std::mt19937_64 rng(config.seed ^ 0x747261636b696e67ull);
    std::normal_distribution<double> tremor(0.0, policy.tremor_sigma);
    const auto window =
        static_cast<std::size_t>(std::llround(config.schedule.tracking_hold / config.plant.tick));
    std::vector<double> signal;
    signal.reserve(window * config.schedule.tracking_levels.size());
    for (double level : config.schedule.tracking_levels) {
      for (std::size_t i = 0; i < window; ++i) {
        const double noise = policy.tremor_sigma > 0.0 ? tremor(rng) : 0.0;
        signal.push_back(std::clamp(level + noise, 0.0, 1.0));
      }
    }
    if (!config.schedule.tracking_levels.empty()) {
      result.tracking_rmse = tracking_assessment(config.schedule.tracking_levels, signal,
                                                 config.schedule.tracking_hold, config.plant.tick);
    }
  }

  Session session(config.group, config.session_params());
  ScriptedOperator op(config.operator_policy(), config.plant, config.controller.flex_trigger,
                      config.vibration.contact_threshold, config.vibration.gain);
  const InputSource source = [&op](const OperatorView& view) {
    return InputSample{op.next(view), false};
  };
  for (int k = 1; k <= config.schedule.trials; ++k) {
    op.begin_trial();
    TrialRun run = run_trial(session, source, k, config, keep_telemetry || static_cast<bool>(sink));
    if (sink) sink(run);
    result.trials.push_back(std::move(run.record));
  }
  return result;
}

void write_attempts_csv(std::ostream& out, const std::string& session_id, Group group,
                        std::span<const TrialRecord> trials) {
  out << "session_id,group,trial,attempt_idx,mode,start_t,end_t,min100_mean,in_margin,lifted,"
         "airborne_duration,broke\n";
  for (const TrialRecord& t : trials) {
    for (const AttemptRecord& a : t.attempts) {
      out << session_id << ',' << to_string(group) << ',' << t.trial_index << ',' << a.index << ','
          << to_string(a.mode) << ',' << format_double(a.start_t) << ','
          << format_double(a.end_t) << ',' << format_double(a.min100_mean) << ','
          << (a.in_margin ? 1 : 0) << ',' << (a.lifted ? 1 : 0) << ','
          << format_double(a.airborne_duration) << ',' << (a.broke ? 1 : 0) << '\n';
    }
  }
}

void write_trials_csv(std::ostream& out, const std::string& session_id, Group group,
                      std::span<const TrialRecord> trials) {
  out << "session_id,group,trial,lifts,breaks\n";
  for (const TrialRecord& t : trials) {
    out << session_id << ',' << to_string(group) << ',' << t.trial_index << ',' << t.lifts << ','
        << t.breaks << '\n';
  }
}

std::filesystem::path telemetry_path(const std::filesystem::path& dir, int trial) {
  return dir / ("telemetry_trial" + std::to_string(trial) + ".csv");
}

std::filesystem::path inputs_path(const std::filesystem::path& dir, int trial) {
  return dir / ("inputs_trial" + std::to_string(trial) + ".csv");
}

namespace {

std::filesystem::path events_path(const std::filesystem::path& dir, int trial) {
  return dir / ("events_trial" + std::to_string(trial) + ".csv");
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return in;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

struct TrialWriter::Impl {
  std::filesystem::path telemetry_file;
  std::filesystem::path inputs_file;
  std::filesystem::path events_file;
  std::ofstream telemetry;
  std::ofstream inputs;
  std::ofstream events;
};

TrialWriter::TrialWriter(const std::filesystem::path& dir, int trial)
    : impl_(std::make_unique<Impl>()) {
  ensure_dir(dir);
  impl_->telemetry_file = telemetry_path(dir, trial);
  impl_->inputs_file = inputs_path(dir, trial);
  impl_->events_file = events_path(dir, trial);
  impl_->telemetry = open_output(impl_->telemetry_file);
  impl_->inputs = open_output(impl_->inputs_file);
  impl_->events = open_output(impl_->events_file);
  write_telemetry_header(impl_->telemetry);
  write_inputs_header(impl_->inputs);
  impl_->events << "t,event\n";
}

TrialWriter::~TrialWriter() = default;

void TrialWriter::add(std::int64_t tick, const InputSample& input, const TelemetryRow& row) {
  write_input_row(impl_->inputs, tick, input);
  write_telemetry_row(impl_->telemetry, row);
  if (row.events != 0) {
    for (std::string_view name : event_names(row.events)) {
      impl_->events << format_double(row.t) << ',' << name << '\n';
    }
  }
}

void TrialWriter::finish() {
  check_written(impl_->telemetry, impl_->telemetry_file);
  check_written(impl_->inputs, impl_->inputs_file);
  check_written(impl_->events, impl_->events_file);
  impl_->telemetry.close();
  impl_->inputs.close();
  impl_->events.close();
}

void write_summary(const ExperimentConfig& config, std::span<const TrialRecord> trials,
                   const std::filesystem::path& dir) {
  ensure_dir(dir);
  const std::string id = config.session_id();
  {
    const auto path = dir / "attempts.csv";
    auto out = open_output(path);
    write_attempts_csv(out, id, config.group, trials);
    check_written(out, path);
  }
  {
    const auto path = dir / "trials.csv";
    auto out = open_output(path);
    write_trials_csv(out, id, config.group, trials);
    check_written(out, path);
  }
  {
    const auto path = dir / "session.json";
    nlohmann::json j;
    j["session_id"] = id;
    j["group"] = std::string(to_string(config.group));
    j["seed"] = config.seed;
    j["trials_completed"] = trials.size();
    j["params"] = config_to_json(config);
    auto out = open_output(path);
    out << j.dump(2) << '\n';
    check_written(out, path);
  }
}

ExperimentResult write_experiment(const ExperimentConfig& config,
                                  const std::filesystem::path& dir) {
  ensure_dir(dir);
  const TrialSink sink = [&](const TrialRun& run) {
    TrialWriter writer(dir, run.record.trial_index);
    for (std::size_t n = 0; n < run.telemetry.size(); ++n) {
      writer.add(static_cast<std::int64_t>(n), run.inputs[n], run.telemetry[n]);
    }
    writer.finish();
  };
  ExperimentResult result = run_experiment(config, sink, false);
  write_summary(config, result.trials, dir);

  const auto path = dir / "assessment.csv";
  auto out = open_output(path);
  out << "session_id,level,rmse\n";
  for (std::size_t i = 0; i < result.tracking_rmse.size(); ++i) {
    out << result.session_id << ',' << format_double(config.schedule.tracking_levels[i]) << ','
        << format_double(result.tracking_rmse[i]) << '\n';
  }
  check_written(out, path);
  return result;
}

ExperimentConfig read_session_config(const std::filesystem::path& dir) {
  const auto path = dir / "session.json";
  auto in = open_input(path);
  nlohmann::json j;
  try {
    in >> j;
    return config_from_json(j.at("params"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<TrialRecord> replay_telemetry(const std::filesystem::path& run,
                                          const std::filesystem::path& out) {
  const ExperimentConfig config = read_session_config(run);
  const SegmentParams params = segment_params(config);
  std::vector<TrialRecord> trials;
  for (int k = 1; std::filesystem::exists(telemetry_path(run, k)); ++k) {
    auto in = open_input(telemetry_path(run, k));
    std::vector<TelemetryRow> rows;
    try {
      rows = read_telemetry(in);
    } catch (const std::runtime_error& e) {
      throw IoError(telemetry_path(run, k).string() + ": " + e.what());
    }
    trials.push_back(summarize_trial(k, rows, params));
  }
  if (trials.empty()) throw IoError("no telemetry_trial1.csv in " + run.string());
  write_summary(config, trials, out);
  return trials;
}

std::vector<TrialRecord> replay_inputs(const std::filesystem::path& run,
                                       const std::filesystem::path& out) {
  const ExperimentConfig config = read_session_config(run);
  const SegmentParams params = segment_params(config);
  Session session(config.group, config.session_params());
  std::vector<TrialRecord> trials;
  for (int k = 1; std::filesystem::exists(inputs_path(run, k)); ++k) {
    auto in = open_input(inputs_path(run, k));
    std::vector<InputSample> inputs;
    try {
      inputs = read_inputs(in);
    } catch (const std::runtime_error& e) {
      throw IoError(inputs_path(run, k).string() + ": " + e.what());
    }
    session.begin_trial();
    TrialWriter writer(out, k);
    std::vector<TelemetryRow> rows;
    rows.reserve(inputs.size());
    for (std::size_t n = 0; n < inputs.size(); ++n) {
      rows.push_back(session.step(inputs[n].input, inputs[n].safety_stop));
      writer.add(static_cast<std::int64_t>(n), inputs[n], rows.back());
    }
    writer.finish();
    trials.push_back(summarize_trial(k, rows, params));
  }
  if (trials.empty()) throw IoError("no inputs_trial1.csv in " + run.string());
  write_summary(config, trials, out);
  return trials;
}

}  // namespace hsc
