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

#include <array>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace hsc {

/// Windowed-sinc low-pass with a Hamming window, order + 1 taps, scaled to
/// unit DC gain. Throws std::invalid_argument for an odd or non-positive
/// order, or a cutoff outside (0, sample_rate / 2).
std::vector<double> design_fir(int order, double cutoff, double sample_rate);

/// |H(f)| of an FIR filter.
double fir_magnitude(std::span<const double> coeffs, double frequency, double sample_rate);

/// Convolves and keeps only fully overlapped outputs, so the result has
/// series.size() - order samples and out[j] is centred on series[j + order / 2]
/// (the group delay is already removed). Throws std::invalid_argument when the
/// series is not longer than the order.
std::vector<double> apply_fir(std::span<const double> coeffs, std::span<const double> series);

/// Extinction coefficients in 1/(mM cm), rows per wavelength, columns
/// (HbO, HbR). Defaults are tabulated values at 730 and 850 nm.
struct MbllParams {
  std::array<std::array<double, 2>, 2> extinction{{{0.390, 1.1022}, {1.058, 0.69132}}};
  std::array<double, 2> dpf{6.0, 6.0};
  double distance = 2.5;            // cm

  void validate() const;
};

/// Concentration changes in micromolar.
struct HemoSample {
  double hbo = 0.0;
  double hbr = 0.0;
  double hbt = 0.0;
};

/// Modified Beer-Lambert law for one sample pair. Throws
/// std::invalid_argument on non-positive intensities or a singular matrix.
HemoSample mbll_sample(std::array<double, 2> intensity, std::array<double, 2> baseline,
                       const MbllParams& params);

/// Forward model: intensities seen for the given concentration changes (uM).
std::array<double, 2> forward_intensity(double hbo, double hbr, std::array<double, 2> baseline,
                                        const MbllParams& params);

struct HemoSeries {
  std::vector<double> hbo;
  std::vector<double> hbr;
  std::vector<double> hbt;
};

HemoSeries mbll(std::span<const double> wl1, std::span<const double> wl2,
                std::array<double, 2> baseline, const MbllParams& params);

struct ZScores {
  std::vector<double> values;
  bool degenerate = false;          // zero variance: all zeros returned
};

/// (x - mean) / sd with the n - 1 sample sd. Throws for fewer than 2 values.
ZScores zscore(std::span<const double> x);

/// (z(lifts) - z(hbt)) / sqrt(2) elementwise. Throws on a length mismatch.
std::vector<double> neural_efficiency(std::span<const double> lifts, std::span<const double> hbt);

struct AnalysisParams {
  double sample_rate = 2.0;         // Hz
  int fir_order = 40;
  double cutoff = 0.1;              // Hz
  bool baseline_subtract = false;   // subtract the mean HbT of rows marked baseline
  MbllParams mbll;

  void validate() const;
};

inline constexpr std::array<const char*, 4> kRegions = {"left_lateral", "left_medial",
                                                        "right_medial", "right_lateral"};

/// One region's raw recording.
struct OpticalChannel {
  std::vector<double> time;
  std::vector<double> wl1;
  std::vector<double> wl2;
  std::vector<bool> baseline;
};

/// Keyed by (session_id, region); session_id is empty when the file has no
/// such column.
using OpticalRecording = std::map<std::pair<std::string, std::string>, OpticalChannel>;

/// Columns time_s, region, wl1_intensity, wl2_intensity, with optional
/// baseline (0/1) and session_id. Throws std::runtime_error naming the line.
OpticalRecording read_fnirs_csv(std::istream& in);

/// Filtered and converted series, with time stamps of the kept samples.
struct RegionHemo {
  std::vector<double> time;
  HemoSeries hemo;
};

/// Filters the intensities, then converts them. I0 is the mean of baseline
/// rows, or the first sample when none are marked.
RegionHemo process_region(const OpticalChannel& channel, const AnalysisParams& params);

struct TrialLifts {
  std::string session_id;
  int trial = 0;
  int lifts = 0;
};

/// Reads the trials CSV written by `run` (session_id, group, trial, lifts, breaks).
std::vector<TrialLifts> read_trials_csv(std::istream& in);

struct TrialWindow {
  double start = 0.0;
  double end = 0.0;
};

struct MetricRow {
  std::string session_id;
  int trial = 0;
  std::string region;
  double mean_hbt = 0.0;
  int lifts = 0;
  double neural_efficiency = 0.0;
};

struct AnalysisResult {
  std::map<std::pair<std::string, std::string>, RegionHemo> hemo;
  std::vector<MetricRow> metrics;
  std::vector<std::string> warnings;
};

/// Full pipeline. `windows[k]` is trial k + 1 in recording time. When the
/// recording has no session_id column, `default_session` names the session
/// whose lifts are used. z-scores run across all (session, trial) rows of a
/// region.
AnalysisResult analyze(const OpticalRecording& recording, std::span<const TrialLifts> lifts,
                       std::span<const TrialWindow> windows, const std::string& default_session,
                       const AnalysisParams& params);

void write_hemo_csv(std::ostream& out, const AnalysisResult& result);
void write_metrics_csv(std::ostream& out, const AnalysisResult& result);

}  // namespace hsc
