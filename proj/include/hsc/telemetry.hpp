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

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hsc/operator_io.hpp"
#include "hsc/session.hpp"

namespace hsc {

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);
/// Strict parse of a whole field. Throws std::invalid_argument.
double parse_double(std::string_view text);

/// Splits one CSV line on commas. No quoting; none of our files need it.
std::vector<std::string_view> split_csv(std::string_view line);

inline constexpr std::string_view kTelemetryHeader =
    "t,mode,stage,S_f,S_e,u_c,aperture_pct,L,nu_envelope,led,airborne,broken,event";

void write_telemetry_header(std::ostream& out);
void write_telemetry_row(std::ostream& out, const TelemetryRow& row);

/// Reads a telemetry CSV. Throws std::runtime_error naming the line on
/// malformed input or non-increasing time.
std::vector<TelemetryRow> read_telemetry(std::istream& in);

/// One tick of operator input as received, for exact re-simulation.
struct InputSample {
  OperatorInput input;
  bool safety_stop = false;

  bool operator==(const InputSample& other) const {
    return input.flex == other.input.flex && input.ext == other.input.ext &&
           input.lift == other.input.lift && input.button == other.input.button &&
           safety_stop == other.safety_stop;
  }
};

inline constexpr std::string_view kInputsHeader = "tick,flex,ext,lift,button,safety_stop";

void write_inputs_header(std::ostream& out);
void write_input_row(std::ostream& out, std::int64_t tick, const InputSample& sample);
std::vector<InputSample> read_inputs(std::istream& in);

}  // namespace hsc
