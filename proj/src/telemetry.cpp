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

#include "hsc/telemetry.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace hsc {

std::string format_double(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("format_double: non-finite value");
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw std::invalid_argument("not a finite number: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

namespace {

bool parse_flag(std::string_view text) {
  if (text == "1") return true;
  if (text == "0") return false;
  throw std::invalid_argument("expected 0 or 1, got '" + std::string(text) + "'");
}

std::string line_error(std::size_t line_no, const std::string& what) {
  return "line " + std::to_string(line_no) + ": " + what;
}

}  // namespace

void write_telemetry_header(std::ostream& out) { out << kTelemetryHeader << '\n'; }

void write_telemetry_row(std::ostream& out, const TelemetryRow& row) {
  out << format_double(row.t) << ',' << to_string(row.mode) << ',' << to_string(row.stage) << ','
      << format_double(row.flex) << ',' << format_double(row.ext) << ','
      << format_double(row.motor) << ',' << format_double(row.aperture_pct) << ','
      << format_double(row.load) << ',' << format_double(row.envelope) << ','
      << (row.led ? '1' : '0') << ',' << (row.airborne ? '1' : '0') << ','
      << (row.broken ? '1' : '0') << ',' << format_events(row.events) << '\n';
}

std::vector<TelemetryRow> read_telemetry(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("telemetry: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTelemetryHeader) throw std::runtime_error("telemetry: unexpected header");

  std::vector<TelemetryRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 13) throw std::runtime_error(line_error(line_no, "expected 13 fields"));
    try {
      TelemetryRow row;
      row.t = parse_double(f[0]);
      const auto mode = parse_mode_tag(f[1]);
      const auto stage = parse_stage(f[2]);
      if (!mode || !stage) throw std::invalid_argument("unknown mode or stage");
      row.mode = *mode;
      row.stage = *stage;
      row.flex = parse_double(f[3]);
      row.ext = parse_double(f[4]);
      row.motor = parse_double(f[5]);
      row.aperture_pct = parse_double(f[6]);
      row.load = parse_double(f[7]);
      row.envelope = parse_double(f[8]);
      row.led = parse_flag(f[9]);
      row.airborne = parse_flag(f[10]);
      row.broken = parse_flag(f[11]);
      row.events = parse_events(f[12]);
      if (!rows.empty() && !(row.t > rows.back().t)) {
        throw std::invalid_argument("time is not increasing");
      }
      rows.push_back(row);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(line_error(line_no, e.what()));
    }
  }
  return rows;
}

void write_inputs_header(std::ostream& out) { out << kInputsHeader << '\n'; }

void write_input_row(std::ostream& out, std::int64_t tick, const InputSample& sample) {
  out << tick << ',' << format_double(sample.input.flex) << ','
      << format_double(sample.input.ext) << ',' << format_double(sample.input.lift) << ','
      << (sample.input.button ? '1' : '0') << ',' << (sample.safety_stop ? '1' : '0') << '\n';
}

std::vector<InputSample> read_inputs(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("inputs: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kInputsHeader) throw std::runtime_error("inputs: unexpected header");

  std::vector<InputSample> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 6) throw std::runtime_error(line_error(line_no, "expected 6 fields"));
    try {
      std::int64_t tick = 0;
      const auto res = std::from_chars(f[0].data(), f[0].data() + f[0].size(), tick);
      if (res.ec != std::errc{} || res.ptr != f[0].data() + f[0].size() ||
          tick != static_cast<std::int64_t>(samples.size())) {
        throw std::invalid_argument("tick column must count up from 0");
      }
      InputSample s;
      s.input.flex = parse_double(f[1]);
      s.input.ext = parse_double(f[2]);
      s.input.lift = parse_double(f[3]);
      s.input.button = parse_flag(f[4]);
      s.safety_stop = parse_flag(f[5]);
      samples.push_back(s);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(line_error(line_no, e.what()));
    }
  }
  return samples;
}

}  // namespace hsc
