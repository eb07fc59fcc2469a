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

#include "hsc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <optional>
#include <set>
#include <tuple>
#include <stdexcept>

#include "hsc/telemetry.hpp"

namespace hsc {

std::vector<double> design_fir(int order, double cutoff, double sample_rate) {
  if (order <= 0 || order % 2 != 0) throw std::invalid_argument("design_fir: order must be even");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("design_fir: sample_rate must be > 0");
  if (!(cutoff > 0.0 && cutoff < sample_rate / 2.0)) {
    throw std::invalid_argument("design_fir: cutoff must lie in (0, Nyquist)");
  }
  const double fc = cutoff / sample_rate;  // cycles per sample
  const int half = order / 2;
  std::vector<double> h(static_cast<std::size_t>(order + 1));
  for (int n = 0; n <= order; ++n) {
    const int m = n - half;
    const double ideal = m == 0 ? 2.0 * fc
                                : std::sin(2.0 * std::numbers::pi * fc * m) / (std::numbers::pi * m);
    const double window = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / order);
    h[static_cast<std::size_t>(n)] = ideal * window;
  }
  // Normalize with symmetric pair sums so h[k] == h[order - k] stays exact.
  double sum = h[static_cast<std::size_t>(half)];
  for (int k = 0; k < half; ++k) sum += 2.0 * h[static_cast<std::size_t>(k)];
  for (int k = 0; k < half; ++k) {
    const double v = h[static_cast<std::size_t>(k)] / sum;
    h[static_cast<std::size_t>(k)] = v;
    h[static_cast<std::size_t>(order - k)] = v;
  }
  h[static_cast<std::size_t>(half)] /= sum;
  return h;
}

double fir_magnitude(std::span<const double> coeffs, double frequency, double sample_rate) {
  std::complex<double> acc = 0.0;
  const double w = 2.0 * std::numbers::pi * frequency / sample_rate;
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    acc += coeffs[n] * std::polar(1.0, -w * static_cast<double>(n));
  }
  return std::abs(acc);
}

std::vector<double> apply_fir(std::span<const double> coeffs, std::span<const double> series) {
  if (coeffs.empty()) throw std::invalid_argument("apply_fir: empty filter");
  const std::size_t order = coeffs.size() - 1;
  if (series.size() <= order) throw std::invalid_argument("apply_fir: series shorter than filter");
  std::vector<double> out(series.size() - order);
  for (std::size_t j = 0; j < out.size(); ++j) {
    double acc = 0.0;
    // y[j + order] = sum_k h[k] x[j + order - k]
    for (std::size_t k = 0; k <= order; ++k) acc += coeffs[k] * series[j + order - k];
    out[j] = acc;
  }
  return out;
}

void MbllParams::validate() const {
  const double det =
      extinction[0][0] * extinction[1][1] - extinction[0][1] * extinction[1][0];
  if (!std::isfinite(det) || std::abs(det) < 1e-12) {
    throw std::invalid_argument("mbll: extinction matrix is singular");
  }
  if (!(dpf[0] > 0.0 && dpf[1] > 0.0)) throw std::invalid_argument("mbll: dpf must be > 0");
  if (!(distance > 0.0)) throw std::invalid_argument("mbll: distance must be > 0");
}

namespace {

constexpr double kMicromolarPerMillimolar = 1000.0;

}  // namespace

HemoSample mbll_sample(std::array<double, 2> intensity, std::array<double, 2> baseline,
                       const MbllParams& params) {
  params.validate();
  for (double v : {intensity[0], intensity[1], baseline[0], baseline[1]}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("mbll: intensities must be > 0");
  }
  // Effective absorbance per unit path, per wavelength.
  const double a0 = -std::log10(intensity[0] / baseline[0]) / (params.distance * params.dpf[0]);
  const double a1 = -std::log10(intensity[1] / baseline[1]) / (params.distance * params.dpf[1]);
  const auto& e = params.extinction;
  const double det = e[0][0] * e[1][1] - e[0][1] * e[1][0];
  HemoSample s;
  s.hbo = (e[1][1] * a0 - e[0][1] * a1) / det * kMicromolarPerMillimolar;
  s.hbr = (-e[1][0] * a0 + e[0][0] * a1) / det * kMicromolarPerMillimolar;
  s.hbt = s.hbo + s.hbr;
  return s;
}

std::array<double, 2> forward_intensity(double hbo, double hbr, std::array<double, 2> baseline,
                                        const MbllParams& params) {
  std::array<double, 2> out{};
  for (std::size_t w = 0; w < 2; ++w) {
    const double od = (params.extinction[w][0] * hbo + params.extinction[w][1] * hbr) /
                      kMicromolarPerMillimolar * params.distance * params.dpf[w];
    out[w] = baseline[w] * std::pow(10.0, -od);
  }
  return out;
}

HemoSeries mbll(std::span<const double> wl1, std::span<const double> wl2,
                std::array<double, 2> baseline, const MbllParams& params) {
  if (wl1.size() != wl2.size()) throw std::invalid_argument("mbll: channel lengths differ");
  HemoSeries out;
  out.hbo.reserve(wl1.size());
  out.hbr.reserve(wl1.size());
  out.hbt.reserve(wl1.size());
  for (std::size_t i = 0; i < wl1.size(); ++i) {
    const HemoSample s = mbll_sample({wl1[i], wl2[i]}, baseline, params);
    out.hbo.push_back(s.hbo);
    out.hbr.push_back(s.hbr);
    out.hbt.push_back(s.hbt);
  }
  return out;
}

ZScores zscore(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("zscore: need at least two values");
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  ZScores out;
  if (!(sd > 0.0)) {
    out.values.assign(x.size(), 0.0);
    out.degenerate = true;
    return out;
  }
  out.values.reserve(x.size());
  for (double v : x) out.values.push_back((v - mean) / sd);
  return out;
}

std::vector<double> neural_efficiency(std::span<const double> lifts, std::span<const double> hbt) {
  if (lifts.size() != hbt.size()) throw std::invalid_argument("neural_efficiency: length mismatch");
  const ZScores zl = zscore(lifts);
  const ZScores zh = zscore(hbt);
  std::vector<double> out(lifts.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (zl.values[i] - zh.values[i]) / std::numbers::sqrt2;
  }
  return out;
}

void AnalysisParams::validate() const {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("analysis: sample_rate must be > 0");
  if (fir_order <= 0 || fir_order % 2 != 0) {
    throw std::invalid_argument("analysis: fir_order must be positive and even");
  }
  if (!(cutoff > 0.0 && cutoff < sample_rate / 2.0)) {
    throw std::invalid_argument("analysis: cutoff must lie in (0, sample_rate / 2)");
  }
  mbll.validate();
}

OpticalRecording read_fnirs_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("fnirs: empty file");
  const auto header = split_csv(line);
  auto column = [&](std::string_view name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int c_time = column("time_s");
  const int c_region = column("region");
  const int c_wl1 = column("wl1_intensity");
  const int c_wl2 = column("wl2_intensity");
  const int c_base = column("baseline");
  const int c_session = column("session_id");
  if (c_time < 0 || c_region < 0 || c_wl1 < 0 || c_wl2 < 0) {
    throw std::runtime_error("fnirs: need columns time_s, region, wl1_intensity, wl2_intensity");
  }

  OpticalRecording rec;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) {
      throw std::runtime_error("fnirs: line " + std::to_string(line_no) + ": wrong field count");
    }
    try {
      const std::string region(f[static_cast<std::size_t>(c_region)]);
      if (std::find_if(kRegions.begin(), kRegions.end(),
                       [&](const char* r) { return region == r; }) == kRegions.end()) {
        throw std::invalid_argument("unknown region '" + region + "'");
      }
      const std::string session =
          c_session < 0 ? std::string() : std::string(f[static_cast<std::size_t>(c_session)]);
      OpticalChannel& ch = rec[{session, region}];
      const double t = parse_double(f[static_cast<std::size_t>(c_time)]);
      if (!ch.time.empty() && !(t > ch.time.back())) {
        throw std::invalid_argument("time is not increasing within the region");
      }
      const double w1 = parse_double(f[static_cast<std::size_t>(c_wl1)]);
      const double w2 = parse_double(f[static_cast<std::size_t>(c_wl2)]);
      if (!(w1 > 0.0) || !(w2 > 0.0)) throw std::invalid_argument("intensities must be > 0");
      bool base = false;
      if (c_base >= 0) {
        const auto b = f[static_cast<std::size_t>(c_base)];
        if (b != "0" && b != "1") throw std::invalid_argument("baseline must be 0 or 1");
        base = b == "1";
      }
      ch.time.push_back(t);
      ch.wl1.push_back(w1);
      ch.wl2.push_back(w2);
      ch.baseline.push_back(base);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("fnirs: line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (rec.empty()) throw std::runtime_error("fnirs: no samples");
  return rec;
}

RegionHemo process_region(const OpticalChannel& channel, const AnalysisParams& params) {
  params.validate();
  std::array<double, 2> i0{0.0, 0.0};
  std::size_t nbase = 0;
  for (std::size_t i = 0; i < channel.time.size(); ++i) {
    if (channel.baseline[i]) {
      i0[0] += channel.wl1[i];
      i0[1] += channel.wl2[i];
      ++nbase;
    }
  }
  if (nbase > 0) {
    i0[0] /= static_cast<double>(nbase);
    i0[1] /= static_cast<double>(nbase);
  } else {
    i0 = {channel.wl1.front(), channel.wl2.front()};
  }

  const auto coeffs = design_fir(params.fir_order, params.cutoff, params.sample_rate);
  const auto f1 = apply_fir(coeffs, channel.wl1);
  const auto f2 = apply_fir(coeffs, channel.wl2);
  const std::size_t shift = static_cast<std::size_t>(params.fir_order / 2);

  RegionHemo out;
  out.hemo = mbll(f1, f2, i0, params.mbll);
  out.time.assign(channel.time.begin() + static_cast<std::ptrdiff_t>(shift),
                  channel.time.begin() + static_cast<std::ptrdiff_t>(shift + f1.size()));
  if (params.baseline_subtract && nbase > 0) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < out.time.size(); ++j) {
      if (channel.baseline[j + shift]) {
        sum += out.hemo.hbt[j];
        ++count;
      }
    }
    if (count > 0) {
      const double mean = sum / static_cast<double>(count);
      for (double& v : out.hemo.hbt) v -= mean;
    }
  }
  return out;
}

std::vector<TrialLifts> read_trials_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trials: empty file");
  const auto header = split_csv(line);
  auto column = [&](std::string_view name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("trials: missing column " + std::string(name));
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_session = column("session_id");
  const std::size_t c_trial = column("trial");
  const std::size_t c_lifts = column("lifts");

  std::vector<TrialLifts> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) {
      throw std::runtime_error("trials: line " + std::to_string(line_no) + ": wrong field count");
    }
    try {
      TrialLifts t;
      t.session_id = std::string(f[c_session]);
      t.trial = static_cast<int>(parse_double(f[c_trial]));
      t.lifts = static_cast<int>(parse_double(f[c_lifts]));
      out.push_back(t);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("trials: line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

AnalysisResult analyze(const OpticalRecording& recording, std::span<const TrialLifts> lifts,
                       std::span<const TrialWindow> windows, const std::string& default_session,
                       const AnalysisParams& params) {
  AnalysisResult result;
  for (const auto& [key, channel] : recording) {
    result.hemo.emplace(key, process_region(channel, params));
  }

  auto lifts_for = [&](const std::string& session, int trial) -> std::optional<int> {
    for (const auto& l : lifts) {
      if (l.session_id == session && l.trial == trial) return l.lifts;
    }
    return std::nullopt;
  };

  for (const char* region : kRegions) {
    std::vector<MetricRow> rows;
    for (const auto& [key, hemo] : result.hemo) {
      if (key.second != region) continue;
      const std::string session = key.first.empty() ? default_session : key.first;
      for (std::size_t k = 0; k < windows.size(); ++k) {
        const int trial = static_cast<int>(k) + 1;
        const auto count = lifts_for(session, trial);
        if (!count) {
          throw std::runtime_error("no lifts recorded for session '" + session + "' trial " +
                                   std::to_string(trial));
        }
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t j = 0; j < hemo.time.size(); ++j) {
          if (hemo.time[j] >= windows[k].start && hemo.time[j] < windows[k].end) {
            sum += hemo.hemo.hbt[j];
            ++n;
          }
        }
        if (n == 0) {
          throw std::runtime_error(std::string("no filtered samples inside trial ") +
                                   std::to_string(trial) + " for region " + region);
        }
        rows.push_back({session, trial, region, sum / static_cast<double>(n), *count, 0.0});
      }
    }
    if (rows.empty()) continue;
    if (rows.size() < 2) {
      result.warnings.push_back(std::string(region) + ": one trial, neural efficiency set to 0");
    } else {
      std::vector<double> l, h;
      for (const auto& r : rows) {
        l.push_back(r.lifts);
        h.push_back(r.mean_hbt);
      }
      if (zscore(l).degenerate) {
        result.warnings.push_back(std::string(region) + ": lifts have zero variance");
      }
      if (zscore(h).degenerate) {
        result.warnings.push_back(std::string(region) + ": HbT has zero variance");
      }
      const auto ne = neural_efficiency(l, h);
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i].neural_efficiency = ne[i];
    }
    result.metrics.insert(result.metrics.end(), rows.begin(), rows.end());
  }
  std::stable_sort(result.metrics.begin(), result.metrics.end(),
                   [](const MetricRow& a, const MetricRow& b) {
                     return std::tie(a.session_id, a.trial) < std::tie(b.session_id, b.trial);
                   });
  return result;
}

void write_hemo_csv(std::ostream& out, const AnalysisResult& result) {
  const bool sessions = std::any_of(result.hemo.begin(), result.hemo.end(),
                                    [](const auto& kv) { return !kv.first.first.empty(); });
  out << (sessions ? "session_id," : "") << "time_s,region,hbo,hbr,hbt\n";
  for (const auto& [key, region] : result.hemo) {
    for (std::size_t j = 0; j < region.time.size(); ++j) {
      if (sessions) out << key.first << ',';
      out << format_double(region.time[j]) << ',' << key.second << ','
          << format_double(region.hemo.hbo[j]) << ',' << format_double(region.hemo.hbr[j]) << ','
          << format_double(region.hemo.hbt[j]) << '\n';
    }
  }
}

void write_metrics_csv(std::ostream& out, const AnalysisResult& result) {
  out << "session_id,trial,region,mean_hbt,lifts,neural_efficiency\n";
  for (const auto& r : result.metrics) {
    out << r.session_id << ',' << r.trial << ',' << r.region << ',' << format_double(r.mean_hbt)
        << ',' << r.lifts << ',' << format_double(r.neural_efficiency) << '\n';
  }
}

}  // namespace hsc
