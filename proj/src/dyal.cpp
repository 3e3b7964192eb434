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

#include "sparsema/dyal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sparsema/csv.hpp"
#include "sparsema/ema.hpp"

namespace sparsema {
namespace {

// x * ln(x / y) with 0 * ln(0) = 0.
double xlogxy(double x, double y) {
  if (x == 0.0) return 0.0;
  if (y == 0.0) return kInfinity;
  return x * std::log(x / y);
}

double rate_from_count(std::uint64_t q_count, double beta_min) {
  return std::clamp(1.0 / static_cast<double>(q_count), beta_min, 1.0);
}

}  // namespace

double binomial_significance(double ema_pr, double q_pr, std::uint64_t q_count) {
  if (q_pr == ema_pr || q_count == 0) return 0.0;
  double kl2 = xlogxy(q_pr, ema_pr) + xlogxy(1.0 - q_pr, 1.0 - ema_pr);
  return static_cast<double>(q_count) * std::max(kl2, 0.0);
}

bool q_significantly_high(double ema_pr, double q_pr, std::uint64_t q_count, double thresh) {
  if (ema_pr == 0.0) return true;
  if (q_pr <= ema_pr) return false;
  return binomial_significance(ema_pr, q_pr, q_count) >= thresh;
}

bool q_significantly_low(double ema_pr, double q_pr, std::uint64_t q_count, double thresh) {
  if (q_pr >= ema_pr) return false;
  return binomial_significance(ema_pr, q_pr, q_count) >= thresh;
}

double weaken_edges(DyalState& s, ItemId o) {
  double used = 0.0;
  for (auto it = s.rate_map.begin(); it != s.rate_map.end();) {
    ItemId i = it->first;
    double w = s.ema_map.get(i);
    if (i == o) {
      used += w;
      ++it;
      continue;
    }
    QueueInfo qi = s.q_map.info(i);
    if (std::max(w, qi.pr) < s.cfg.p_min) {
      s.ema_map.erase(i);
      it = s.rate_map.erase(it);
      continue;
    }
    if (q_significantly_low(w, qi.pr, qi.count, s.cfg.sig_thresh)) {
      w = qi.pr;
      it->second = rate_from_count(qi.count, s.cfg.beta_min);
    } else {
      w *= 1.0 - it->second;
      it->second = decay_rate(it->second, s.cfg.beta_min);
    }
    if (w <= 0.0) {
      s.ema_map.erase(i);
      it = s.rate_map.erase(it);
      continue;
    }
    s.ema_map.set(i, w);
    used += w;
    ++it;
  }
  return 1.0 - used;
}

void dyal_update(DyalState& s, ItemId o) {
  QueueInfo qi = s.q_map.info(o);
  s.q_map.update(o);
  double free_mass = std::max(weaken_edges(s, o), 0.0);
  if (qi.pr > 0.0) {
    double ema_pr = s.ema_map.get(o);
    double delta;
    if (q_significantly_high(ema_pr, qi.pr, qi.count, s.cfg.sig_thresh)) {
      s.rate_map[o] = rate_from_count(qi.count, s.cfg.beta_min);
      delta = std::min(qi.pr - ema_pr, free_mass);
    } else {
      double& beta = s.rate_map.at(o);
      delta = std::min((1.0 - ema_pr) * beta, free_mass);
      beta = decay_rate(beta, s.cfg.beta_min);
    }
    double w = std::min(ema_pr + std::max(delta, 0.0), 1.0);
    if (w > 0.0) {
      s.ema_map.set(o, w);
    } else {
      s.rate_map.erase(o);
    }
  }
  ++s.t;
  if (s.cfg.prune.heartbeat != 0 && s.t % s.cfg.prune.heartbeat == 0) {
    for (ItemId item : s.q_map.prune(s.cfg.prune)) {
      s.ema_map.erase(item);
      s.rate_map.erase(item);
    }
  }
}

double DyalPredictor::max_rate() const {
  double m = 0.0;
  for (const auto& [item, r] : state_.rate_map) m = std::max(m, r);
  return m;
}

double DyalPredictor::median_rate() const {
  if (state_.rate_map.empty()) return 0.0;
  std::vector<double> rates;
  rates.reserve(state_.rate_map.size());
  for (const auto& [item, r] : state_.rate_map) rates.push_back(r);
  std::sort(rates.begin(), rates.end());
  std::size_t n = rates.size();
  return n % 2 ? rates[n / 2] : 0.5 * (rates[n / 2 - 1] + rates[n / 2]);
}

void DyalPredictor::write_snapshot(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_manifest(dir, kind(),
                 {{"t", std::to_string(state_.t)},
                  {"beta_min", format_double(state_.cfg.beta_min)},
                  {"p_min", format_double(state_.cfg.p_min)},
                  {"sig_thresh", format_double(state_.cfg.sig_thresh)},
                  {"qcap", std::to_string(state_.cfg.qcap)}});
  write_weights_csv(dir / "ema_map.csv", "weight", state_.ema_map);
  PrMap rates;
  for (const auto& [item, r] : state_.rate_map) rates.set(item, r);
  write_weights_csv(dir / "rate_map.csv", "rate", rates);
  state_.q_map.write_csv(dir / "q_map.csv");
}

}  // namespace sparsema
