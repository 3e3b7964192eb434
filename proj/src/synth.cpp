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

#include "sparsema/synth.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include "sparsema/csv.hpp"

namespace sparsema {
namespace {

SemiDistribution binary_sd(double tp) {
  PrMap m;
  m.set(1, tp);
  m.set(0, 1.0 - tp);
  return SemiDistribution(std::move(m));
}

}  // namespace

void validate(const GenConfig& cfg) {
  if (!(cfg.p_min > 0.0 && cfg.p_ns >= 0.0 && cfg.p_min + cfg.p_ns < 1.0)) {
    throw std::invalid_argument("generator needs p_min > 0, p_ns >= 0, p_min + p_ns < 1");
  }
  if (!(cfg.p_max > cfg.p_min && cfg.p_max <= 1.0)) {
    throw std::invalid_argument("generator p_max must be in (p_min, 1]");
  }
  if (cfg.o_min == 0) throw std::invalid_argument("generator o_min must be at least 1");
}

GeneratedStream gen_binary_stationary(double tp, std::size_t n, Rng& rng) {
  if (!(tp > 0.0 && tp <= 1.0)) throw std::invalid_argument("tp must be in (0,1]");
  GeneratedStream s;
  s.observations.reserve(n);
  for (std::size_t t = 0; t < n; ++t) s.observations.push_back(rng.bernoulli(tp) ? 1 : 0);
  s.schedule.add(1, binary_sd(tp));
  return s;
}

GeneratedStream gen_single_nonstationary(SingleMode mode, const GenConfig& cfg, std::size_t n,
                                         Rng& rng, bool start_high) {
  if (cfg.o_min == 0) throw std::invalid_argument("o_min must be at least 1");
  GeneratedStream s;
  s.observations.reserve(n);
  bool high = start_high;
  std::uint64_t min_len =
      mode == SingleMode::kOscillate
          ? static_cast<std::uint64_t>(std::ceil(static_cast<double>(cfg.o_min) / kOscillateLow))
          : cfg.l_min;
  while (s.observations.size() < n) {
    double tp;
    if (mode == SingleMode::kOscillate) {
      tp = high ? kOscillateHigh : kOscillateLow;
      high = !high;
    } else {
      tp = rng.uniform(0.01, 1.0);
    }
    s.schedule.add(s.observations.size() + 1, binary_sd(tp));
    std::uint64_t ones = 0;
    std::uint64_t len = 0;
    while ((ones < cfg.o_min || len < min_len) && s.observations.size() < n) {
      bool hit = rng.bernoulli(tp);
      ones += hit;
      ++len;
      s.observations.push_back(hit ? 1 : 0);
    }
  }
  return s;
}

SequenceGenerator::SequenceGenerator(const GenConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
  validate(cfg);
}

SemiDistribution SequenceGenerator::gen_sd(const SemiDistribution& /*prev*/) {
  std::vector<double> probs;
  double sum = 0.0;
  while (1.0 - sum > cfg_.p_ns + cfg_.p_min) {
    double hi = std::min(1.0 - sum - cfg_.p_ns, cfg_.p_max);
    double p = rng_.uniform(cfg_.p_min, hi);
    probs.push_back(p);
    sum += p;
  }
  PrMap m;
  if (cfg_.recycle) {
    rng_.shuffle(probs);
    for (std::size_t i = 0; i < probs.size(); ++i) m.set(i + 1, probs[i]);
  } else {
    for (double p : probs) m.set(next_salient_++, p);
  }
  return SemiDistribution(std::move(m));
}

ItemId SequenceGenerator::draw_item(const SemiDistribution& p) {
  double u = rng_.uniform01();
  double cum = 0.0;
  for (const auto& [item, prob] : p.map().sorted()) {
    cum += prob;
    if (u < cum) return item;
  }
  return unique_noise_item();
}

std::vector<ItemId> SequenceGenerator::gen_subseq(const SemiDistribution& p) {
  if (p.empty()) throw std::invalid_argument("gen_subseq: empty SD");
  auto entries = p.map().sorted();
  std::vector<double> cum(entries.size());
  double c = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) cum[i] = (c += entries[i].second);
  std::vector<std::uint64_t> counts(entries.size(), 0);
  std::size_t short_items = entries.size();
  std::vector<ItemId> out;
  while (short_items > 0 || out.size() < cfg_.l_min) {
    double u = rng_.uniform01();
    std::size_t i = std::upper_bound(cum.begin(), cum.end(), u) - cum.begin();
    if (i < entries.size()) {
      out.push_back(entries[i].first);
      if (++counts[i] == cfg_.o_min) --short_items;
    } else {
      out.push_back(unique_noise_item());
    }
  }
  return out;
}

GeneratedStream SequenceGenerator::gen_sequence() {
  GeneratedStream s;
  SemiDistribution prev;
  while (s.observations.size() < cfg_.desired_len) {
    SemiDistribution p = gen_sd(prev);
    s.schedule.add(s.observations.size() + 1, p);
    auto sub = gen_subseq(p);
    s.observations.insert(s.observations.end(), sub.begin(), sub.end());
    prev = std::move(p);
  }
  return s;
}

void write_schedule_csv(std::ostream& out, const GroundTruthSchedule& schedule) {
  out << "start_t,item_id,prob\n";
  for (const auto& e : schedule.entries()) {
    for (const auto& [item, prob] : e.sd.map().sorted()) {
      out << e.start_t << ',' << item << ',' << format_double(prob) << '\n';
    }
  }
}

GroundTruthSchedule read_schedule_csv(std::istream& in) {
  std::map<std::uint64_t, PrMap> periods;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line.rfind("start_t", 0) == 0) continue;
    }
    auto f = split_csv_line(line);
    if (f.size() != 3) throw std::runtime_error("bad schedule row: " + line);
    periods[std::stoull(f[0])].set(std::stoull(f[1]), std::stod(f[2]));
  }
  GroundTruthSchedule schedule;
  for (auto& [start, m] : periods) schedule.add(start, SemiDistribution(std::move(m)));
  return schedule;
}

void write_stream(const std::filesystem::path& items_file,
                  const std::filesystem::path& schedule_file, const GeneratedStream& s) {
  std::ofstream items(items_file);
  if (!items) throw std::runtime_error("cannot write " + items_file.string());
  for (ItemId o : s.observations) items << o << '\n';
  std::ofstream sched(schedule_file);
  if (!sched) throw std::runtime_error("cannot write " + schedule_file.string());
  write_schedule_csv(sched, s.schedule);
}

GeneratedStream read_stream(const std::filesystem::path& items_file,
                            const std::filesystem::path& schedule_file) {
  GeneratedStream s;
  std::ifstream items(items_file);
  if (!items) throw std::runtime_error("cannot read " + items_file.string());
  std::string line;
  while (std::getline(items, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    s.observations.push_back(std::stoull(line));
  }
  std::ifstream sched(schedule_file);
  if (!sched) throw std::runtime_error("cannot read " + schedule_file.string());
  s.schedule = read_schedule_csv(sched);
  return s;
}

}  // namespace sparsema
