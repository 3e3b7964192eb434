/*
 * Copyright 2026 The Sparsema Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <fstream>
#include <functional>

#include "sparsema/csv.hpp"
#include "sparsema/harness.hpp"

namespace sparsema {
namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("setting '" + key + "': '" + v + "' is not a number");
}

double to_probability(const std::string& key, const std::string& v) {
  double d = to_double(key, v);
  if (!(d >= 0.0 && d <= 1.0)) throw ConfigError("setting '" + key + "' must be in [0,1]");
  return d;
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  double d = to_double(key, v);
  if (d < 0.0 || d != std::floor(d)) {
    throw ConfigError("setting '" + key + "': '" + v + "' is not a non-negative integer");
  }
  return static_cast<std::uint64_t>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("setting '" + key + "': '" + v + "' is not a boolean");
}

using Setter = std::function<void(ExperimentSpec&, const std::string&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"kind", [](auto& s, auto&, auto& v) { s.kind = parse_experiment_kind(v); }},
      {"roster", [](auto& s, auto&, auto& v) { s.roster = parse_roster(v); }},
      {"trials", [](auto& s, auto& k, auto& v) { s.trials = to_count(k, v); }},
      {"seed", [](auto& s, auto& k, auto& v) { s.seed = to_count(k, v); }},
      {"threads", [](auto& s, auto& k, auto& v) { s.threads = to_count(k, v); }},
      {"out_dir", [](auto& s, auto&, auto& v) { s.out_dir = v; }},
      {"traces", [](auto& s, auto& k, auto& v) { s.traces = to_bool(k, v); }},
      {"p_min",
       [](auto& s, auto& k, auto& v) {
         double p = to_probability(k, v);
         s.eval.fc.p_min = p;
         s.defaults.p_min = p;
         s.gen.p_min = p;
       }},
      {"p_ns",
       [](auto& s, auto& k, auto& v) {
         double p = to_probability(k, v);
         s.eval.fc.p_ns = p;
         s.gen.p_ns = p;
       }},
      {"c_ns", [](auto& s, auto& k, auto& v) { s.eval.referee.c_ns = to_count(k, v); }},
      {"referee_window",
       [](auto& s, auto& k, auto& v) { s.eval.referee.window = to_count(k, v); }},
      {"dev_thresholds",
       [](auto& s, auto& k, auto& v) {
         s.eval.dev_thresholds.clear();
         for (const auto& f : split_csv_line(v)) {
           double d = to_double(k, trim(f));
           if (!(d > 1.0)) throw ConfigError("setting '" + k + "': thresholds must exceed 1");
           s.eval.dev_thresholds.push_back(d);
         }
       }},
      {"dev_modes",
       [](auto& s, auto&, auto& v) {
         s.eval.dev_modes.clear();
         for (const auto& f : split_csv_line(v)) {
           try {
             s.eval.dev_modes.push_back(parse_dev_mode(trim(f)));
           } catch (const std::invalid_argument& e) {
             throw ConfigError(e.what());
           }
         }
       }},
      {"dev_on_capped", [](auto& s, auto& k, auto& v) { s.eval.dev_on_capped = to_bool(k, v); }},
      {"target_item", [](auto& s, auto& k, auto& v) { s.eval.target = to_count(k, v); }},
      {"qcap",
       [](auto& s, auto& k, auto& v) {
         s.defaults.qcap = to_count(k, v);
         if (s.defaults.qcap < 2) throw ConfigError("setting 'qcap' must be at least 2");
       }},
      {"sig_thresh", [](auto& s, auto& k, auto& v) { s.defaults.sig_thresh = to_double(k, v); }},
      {"s1", [](auto& s, auto& k, auto& v) { s.defaults.prune.s1 = to_count(k, v); }},
      {"s2", [](auto& s, auto& k, auto& v) { s.defaults.prune.s2 = to_count(k, v); }},
      {"heartbeat", [](auto& s, auto& k, auto& v) { s.defaults.prune.heartbeat = to_count(k, v); }},
      {"ema_drop_below",
       [](auto& s, auto& k, auto& v) { s.defaults.ema_drop_below = to_probability(k, v); }},
      {"tp",
       [](auto& s, auto& k, auto& v) {
         s.tp = to_probability(k, v);
         if (s.tp == 0.0) throw ConfigError("setting 'tp' must be positive");
       }},
      {"length", [](auto& s, auto& k, auto& v) { s.length = to_count(k, v); }},
      {"single_mode",
       [](auto& s, auto& k, auto& v) {
         if (v == "oscillate") {
           s.single_mode = SingleMode::kOscillate;
         } else if (v == "uniform") {
           s.single_mode = SingleMode::kUniform;
         } else {
           throw ConfigError("setting '" + k + "' must be oscillate or uniform");
         }
       }},
      {"start_high", [](auto& s, auto& k, auto& v) { s.start_high = to_bool(k, v); }},
      {"n_p", [](auto& s, auto& k, auto& v) { s.n_p = to_count(k, v); }},
      {"p_max", [](auto& s, auto& k, auto& v) { s.gen.p_max = to_probability(k, v); }},
      {"o_min", [](auto& s, auto& k, auto& v) { s.gen.o_min = to_count(k, v); }},
      {"l_min", [](auto& s, auto& k, auto& v) { s.gen.l_min = to_count(k, v); }},
      {"recycle", [](auto& s, auto& k, auto& v) { s.gen.recycle = to_bool(k, v); }},
      {"desired_len", [](auto& s, auto& k, auto& v) { s.gen.desired_len = to_count(k, v); }},
      {"input", [](auto& s, auto&, auto& v) { s.input = v; }},
      {"line_mode", [](auto& s, auto&, auto& v) { s.line_mode = parse_line_mode(v); }},
      {"conditional", [](auto& s, auto& k, auto& v) { s.conditional = to_bool(k, v); }},
      {"concat_k", [](auto& s, auto& k, auto& v) { s.concat_k = to_count(k, v); }},
  };
  return table;
}

}  // namespace

void apply_setting(ExperimentSpec& spec, const std::string& key, const std::string& value) {
  std::string k = trim(key);
  std::string v = trim(value);
  for (const auto& [name, setter] : setters()) {
    if (name == k) {
      setter(spec, k, v);
      return;
    }
  }
  throw ConfigError("unknown setting '" + k + "'");
}

std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [name, setter] : setters()) keys.push_back(name);
  return keys;
}

}  // namespace sparsema
