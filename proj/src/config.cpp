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

#include "hsc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <variant>

#include <nlohmann/json.hpp>

#include "hsc/telemetry.hpp"

namespace hsc {

void ScheduleConfig::validate() const {
  if (trials < 1) throw ConfigError("schedule.trials must be >= 1");
  if (!(trial_duration > 0.0)) throw ConfigError("schedule.trial_duration must be > 0");
  if (!(break_duration >= 0.0)) throw ConfigError("schedule.break_duration must be >= 0");
  if (!(lift_criterion > 0.0)) throw ConfigError("schedule.lift_criterion must be > 0");
  if (!(object_reset_delay >= 0.0)) throw ConfigError("schedule.object_reset_delay must be >= 0");
  if (!(tracking_hold > 0.0)) throw ConfigError("schedule.tracking_hold must be > 0");
  for (double l : tracking_levels) {
    if (!(l > 0.0 && l < 1.0)) throw ConfigError("schedule.tracking_levels must lie in (0, 1)");
  }
}

void IoConfig::validate() const {
  if (out_dir.empty()) throw ConfigError("io.out_dir must not be empty");
  if (port < 0 || port > 65535) throw ConfigError("io.port must be in [0, 65535]");
  if (!(speed > 0.0)) throw ConfigError("io.speed must be > 0");
}

void ExperimentConfig::validate() const {
  try {
    plant.validate();
    controller.validate();
    vibration.validate();
    policy.validate();
    analysis.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  schedule.validate();
  io.validate();
}

SessionParams ExperimentConfig::session_params() const {
  SessionParams p;
  p.plant = plant;
  p.controller = controller;
  p.vibration = vibration;
  p.object_reset_delay = schedule.object_reset_delay;
  p.lift_criterion = schedule.lift_criterion;
  return p;
}

PolicyParams ExperimentConfig::operator_policy() const {
  PolicyParams p = policy;
  p.seed = seed;
  p.uses_feedback = group != Group::Standard;
  return p;
}

std::string ExperimentConfig::session_id() const {
  return std::string(to_string(group)) + "-" + std::to_string(seed);
}

namespace {

using Target = std::variant<double*, int*, bool*, std::string*, std::uint64_t*,
                            std::vector<double>*, std::span<double>>;

struct Field {
  std::string section;
  std::string key;
  Target target;
};

std::vector<Field> fields(ExperimentConfig& c) {
  auto& e = c.analysis.mbll.extinction;
  return {
      {"", "seed", &c.seed},
      {"plant", "max_aperture", &c.plant.max_aperture},
      {"plant", "object_width", &c.plant.object_width},
      {"plant", "object_mass", &c.plant.object_mass},
      {"plant", "rest_voltage", &c.plant.rest_voltage},
      {"plant", "contact_voltage", &c.plant.contact_voltage},
      {"plant", "volts_per_newton", &c.plant.volts_per_newton},
      {"plant", "break_force", &c.plant.break_force},
      {"plant", "hold_force", &c.plant.hold_force},
      {"plant", "motor_deadband", &c.plant.motor_deadband},
      {"plant", "motor_max", &c.plant.motor_max},
      {"plant", "aperture_gain", &c.plant.aperture_gain},
      {"plant", "break_compression", &c.plant.break_compression},
      {"plant", "tick", &c.plant.tick},
      {"controller", "flex_trigger", &c.controller.flex_trigger},
      {"controller", "stage1_gain", &c.controller.stage1_gain},
      {"controller", "stage1_floor", &c.controller.stage1_floor},
      {"controller", "stage2_cap", &c.controller.stage2_cap},
      {"controller", "stage2_floor", &c.controller.stage2_floor},
      {"controller", "vel_lower", &c.controller.vel_lower},
      {"controller", "vel_upper", &c.controller.vel_upper},
      {"controller", "contact_load", &c.controller.contact_load},
      {"controller", "contact_aperture", &c.controller.contact_aperture},
      {"controller", "kp", &c.controller.kp},
      {"controller", "ki", &c.controller.ki},
      {"controller", "pi_cap", &c.controller.pi_cap},
      {"controller", "settle_band", &c.controller.settle_band},
      {"controller", "settle_dwell", &c.controller.settle_dwell},
      {"controller", "slip_slope", &c.controller.slip_slope},
      {"controller", "break_slope", &c.controller.break_slope},
      {"controller", "enable_hold", &c.controller.enable_hold},
      {"controller", "slope_window", &c.controller.slope_window},
      {"controller", "release_debounce", &c.controller.release_debounce},
      {"controller", "button_debounce", &c.controller.button_debounce},
      {"controller", "vib_carrier", &c.vibration.carrier},
      {"controller", "vib_gain", &c.vibration.gain},
      {"controller", "vib_contact_threshold", &c.vibration.contact_threshold},
      {"controller", "vib_pulse_duration", &c.vibration.pulse_duration},
      {"controller", "vib_pulse_count", &c.vibration.pulse_count},
      {"policy", "target_force", &c.policy.target_force},
      {"policy", "rise_time", &c.policy.rise_time},
      {"policy", "overshoot_sigma", &c.policy.overshoot_sigma},
      {"policy", "tremor_sigma", &c.policy.tremor_sigma},
      {"policy", "reaction_time", &c.policy.reaction_time},
      {"policy", "perception_sigma", &c.policy.perception_sigma},
      {"policy", "correction_gain", &c.policy.correction_gain},
      {"policy", "crosstalk_rate", &c.policy.crosstalk_rate},
      {"schedule", "trials", &c.schedule.trials},
      {"schedule", "trial_duration", &c.schedule.trial_duration},
      {"schedule", "break_duration", &c.schedule.break_duration},
      {"schedule", "lift_criterion", &c.schedule.lift_criterion},
      {"schedule", "object_reset_delay", &c.schedule.object_reset_delay},
      {"schedule", "tracking_levels", &c.schedule.tracking_levels},
      {"schedule", "tracking_hold", &c.schedule.tracking_hold},
      {"io", "out_dir", &c.io.out_dir},
      {"io", "live_mode", &c.io.live_mode},
      {"io", "listen_address", &c.io.listen_address},
      {"io", "port", &c.io.port},
      {"io", "speed", &c.io.speed},
      {"analysis", "sample_rate", &c.analysis.sample_rate},
      {"analysis", "fir_order", &c.analysis.fir_order},
      {"analysis", "cutoff", &c.analysis.cutoff},
      {"analysis", "baseline_subtract", &c.analysis.baseline_subtract},
      {"analysis", "extinction", std::span<double>(e[0].data(), 2 * e[0].size())},
      {"analysis", "dpf", std::span<double>(c.analysis.mbll.dpf)},
      {"analysis", "distance", &c.analysis.mbll.distance},
  };
}

// ---- a small TOML subset ------------------------------------------------

using Value = std::variant<double, bool, std::string, std::vector<double>>;

struct Cursor {
  std::string_view text;
  std::size_t line;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
  }
  void skip_space() {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  }
  bool at_end_or_comment() {
    skip_space();
    return text.empty() || text.front() == '#';
  }
};

double parse_number(Cursor& c) {
  std::size_t n = 0;
  while (n < c.text.size() && std::string_view("+-0123456789.eE_").find(c.text[n]) !=
                                  std::string_view::npos) {
    ++n;
  }
  std::string token(c.text.substr(0, n));
  token.erase(std::remove(token.begin(), token.end(), '_'), token.end());
  if (!token.empty() && token.front() == '+') token.erase(0, 1);
  try {
    const double v = parse_double(token);
    c.text.remove_prefix(n);
    return v;
  } catch (const std::invalid_argument&) {
    c.fail("invalid value '" + std::string(c.text.substr(0, std::max<std::size_t>(n, 1))) + "'");
  }
}

Value parse_value(Cursor& c) {
  c.skip_space();
  if (c.text.empty()) c.fail("missing value");
  if (c.text.front() == '"') {
    std::string out;
    std::size_t i = 1;
    for (; i < c.text.size() && c.text[i] != '"'; ++i) {
      char ch = c.text[i];
      if (ch == '\\') {
        if (++i == c.text.size()) break;
        switch (c.text[i]) {
          case 'n': ch = '\n'; break;
          case 't': ch = '\t'; break;
          case '"': ch = '"'; break;
          case '\\': ch = '\\'; break;
          default: c.fail("unsupported escape in string");
        }
      }
      out += ch;
    }
    if (i >= c.text.size()) c.fail("unterminated string");
    c.text.remove_prefix(i + 1);
    return out;
  }
  if (c.text.substr(0, 4) == "true") {
    c.text.remove_prefix(4);
    return true;
  }
  if (c.text.substr(0, 5) == "false") {
    c.text.remove_prefix(5);
    return false;
  }
  if (c.text.front() == '[') {
    c.text.remove_prefix(1);
    std::vector<double> items;
    while (true) {
      c.skip_space();
      if (c.text.empty()) c.fail("unterminated array");
      if (c.text.front() == ']') break;
      items.push_back(parse_number(c));
      c.skip_space();
      if (!c.text.empty() && c.text.front() == ',') c.text.remove_prefix(1);
    }
    c.text.remove_prefix(1);
    return items;
  }
  return parse_number(c);
}

void assign(const Field& field, const Value& value, const Cursor& c) {
  auto need_number = [&]() -> double {
    if (const double* d = std::get_if<double>(&value)) return *d;
    c.fail(field.key + " expects a number");
  };
  std::visit(
      [&](auto target) {
        using T = decltype(target);
        if constexpr (std::is_same_v<T, double*>) {
          *target = need_number();
        } else if constexpr (std::is_same_v<T, int*>) {
          const double d = need_number();
          if (d != std::trunc(d) || std::abs(d) > 2e9) c.fail(field.key + " expects an integer");
          *target = static_cast<int>(d);
        } else if constexpr (std::is_same_v<T, std::uint64_t*>) {
          const double d = need_number();
          if (d != std::trunc(d) || d < 0 || d > 9.007199254740992e15) {
            c.fail(field.key + " expects a non-negative integer");
          }
          *target = static_cast<std::uint64_t>(d);
        } else if constexpr (std::is_same_v<T, bool*>) {
          const bool* b = std::get_if<bool>(&value);
          if (!b) c.fail(field.key + " expects true or false");
          *target = *b;
        } else if constexpr (std::is_same_v<T, std::string*>) {
          const std::string* s = std::get_if<std::string>(&value);
          if (!s) c.fail(field.key + " expects a string");
          *target = *s;
        } else if constexpr (std::is_same_v<T, std::vector<double>*>) {
          const auto* v = std::get_if<std::vector<double>>(&value);
          if (!v) c.fail(field.key + " expects an array of numbers");
          *target = *v;
        } else {
          const auto* v = std::get_if<std::vector<double>>(&value);
          if (!v || v->size() != target.size()) {
            c.fail(field.key + " expects an array of " + std::to_string(target.size()) +
                   " numbers");
          }
          std::copy(v->begin(), v->end(), target.begin());
        }
      },
      field.target);
}

const std::set<std::string>& known_sections() {
  static const std::set<std::string> s = {"plant",    "controller", "policy",
                                          "schedule", "io",         "analysis"};
  return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  ExperimentConfig config = base;
  auto table = fields(config);
  std::set<std::string> seen;
  std::string section;

  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    Cursor c{raw, line_no};
    if (!c.text.empty() && c.text.back() == '\r') c.text.remove_suffix(1);
    if (c.at_end_or_comment()) continue;

    if (c.text.front() == '[') {
      const auto close = c.text.find(']');
      if (close == std::string_view::npos) c.fail("unterminated section header");
      std::string name(c.text.substr(1, close - 1));
      name.erase(0, name.find_first_not_of(" \t"));
      name.erase(name.find_last_not_of(" \t") + 1);
      if (!known_sections().count(name)) c.fail("unknown section [" + name + "]");
      if (!seen.insert("[" + name).second) c.fail("duplicate section [" + name + "]");
      section = name;
      c.text.remove_prefix(close + 1);
      if (!c.at_end_or_comment()) c.fail("unexpected text after section header");
      continue;
    }

    const auto eq = c.text.find('=');
    if (eq == std::string_view::npos) c.fail("expected key = value");
    std::string key(c.text.substr(0, eq));
    key.erase(key.find_last_not_of(" \t") + 1);
    if (key.empty()) c.fail("missing key");
    c.text.remove_prefix(eq + 1);
    const Value value = parse_value(c);
    if (!c.at_end_or_comment()) c.fail("unexpected text after value");

    const std::string qualified = section.empty() ? key : section + "." + key;
    if (!seen.insert(qualified).second) c.fail("duplicate key " + qualified);

    if (section.empty() && key == "group") {
      const std::string* s = std::get_if<std::string>(&value);
      const auto g = s ? parse_group(*s) : std::nullopt;
      if (!g) c.fail("group must be \"standard\", \"vibro\" or \"shared\"");
      config.group = *g;
      continue;
    }
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) {
      return f.section == section && f.key == key;
    });
    if (it == table.end()) c.fail("unknown key " + qualified);
    assign(*it, value, c);
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), base);
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  ExperimentConfig copy = config;
  nlohmann::json j;
  j["group"] = std::string(to_string(config.group));
  for (const Field& f : fields(copy)) {
    nlohmann::json& slot = f.section.empty() ? j[f.key] : j[f.section][f.key];
    std::visit(
        [&](auto target) {
          using T = decltype(target);
          if constexpr (std::is_same_v<T, std::span<double>>) {
            slot = std::vector<double>(target.begin(), target.end());
          } else {
            slot = *target;
          }
        },
        f.target);
  }
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& json) {
  ExperimentConfig config;
  auto table = fields(config);
  try {
    const auto g = parse_group(json.at("group").get<std::string>());
    if (!g) throw ConfigError("session file: unknown group");
    config.group = *g;
    for (const Field& f : table) {
      const nlohmann::json& slot = f.section.empty() ? json.at(f.key) : json.at(f.section).at(f.key);
      std::visit(
          [&](auto target) {
            using T = decltype(target);
            if constexpr (std::is_same_v<T, std::span<double>>) {
              const auto v = slot.get<std::vector<double>>();
              if (v.size() != target.size()) throw ConfigError("session file: bad array " + f.key);
              std::copy(v.begin(), v.end(), target.begin());
            } else {
              *target = slot.get<std::remove_pointer_t<T>>();
            }
          },
          f.target);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("session file: ") + e.what());
  }
  config.validate();
  return config;
}

}  // namespace hsc
