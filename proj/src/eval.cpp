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

#include "sparsema/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sparsema {

bool Referee::is_ns(ItemId o) {
  auto& count = recent_freq_[o];
  bool flagged = count <= cfg_.c_ns;
  ++count;
  ++total_;
  if (cfg_.window != 0) {
    window_.push_back(o);
    if (window_.size() > cfg_.window) {
      auto it = recent_freq_.find(window_.front());
      window_.pop_front();
      if (--it->second == 0) recent_freq_.erase(it);
      --total_;
    }
  }
  return flagged;
}

std::uint64_t Referee::recent_frequency(ItemId o) const {
  auto it = recent_freq_.find(o);
  return it == recent_freq_.end() ? 0 : it->second;
}

double logloss_rule_ns_capped(ItemId o, const SemiDistribution& capped, bool marked_ns,
                              const FcConfig& cfg) {
  double prob = capped.get(o);
  if (prob > 0.0 && prob >= cfg.p_min) return -std::log(prob);
  if (!marked_ns) return -std::log(cfg.p_ns);
  return -std::log(std::max(capped.unallocated(), cfg.p_ns));
}

double logloss_rule_ns(ItemId o, const PrMap& q, bool marked_ns, const FcConfig& cfg) {
  return logloss_rule_ns_capped(o, filter_cap(q, cfg), marked_ns, cfg);
}

double avg_logloss_ns(const std::vector<PrMap>& preds, const std::vector<ItemId>& obs,
                      Referee& referee, const FcConfig& cfg) {
  if (preds.size() != obs.size()) {
    throw std::invalid_argument("avg_logloss_ns: predictions and observations differ in length");
  }
  if (obs.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t < obs.size(); ++t) {
    total += logloss_rule_ns(obs[t], preds[t], referee.is_ns(obs[t]), cfg);
  }
  return total / static_cast<double>(obs.size());
}

double quad_rule_capped(const SemiDistribution& capped, ItemId o) {
  double loss = 0.0;
  for (const auto& [item, value] : capped) {
    if (item != o) loss += value * value;
  }
  double miss = 1.0 - capped.get(o);
  return loss + miss * miss;
}

double quad_rule(const PrMap& q, ItemId o, const FcConfig& cfg) {
  return quad_rule_capped(filter_cap(q, cfg), o);
}

int deviates(double p_hat, double tp, double d) {
  if (!(tp > 0.0)) throw std::invalid_argument("deviates: tp must be positive");
  if (p_hat == 0.0) return 1;
  return std::max(tp / p_hat, p_hat / tp) > d ? 1 : 0;
}

double dev_rate(const std::vector<double>& estimates, double tp, double d) {
  if (!(tp > 0.0)) throw std::invalid_argument("dev_rate: tp must be positive");
  if (estimates.empty()) return 0.0;
  std::size_t n = 0;
  for (double p : estimates) n += deviates(p, tp, d);
  return static_cast<double>(n) / static_cast<double>(estimates.size());
}

std::string to_string(DevMode mode) {
  switch (mode) {
    case DevMode::kSingle:
      return "single";
    case DevMode::kObs:
      return "obs";
    case DevMode::kAny:
      return "any";
  }
  return "unknown";
}

DevMode parse_dev_mode(const std::string& name) {
  if (name == "single") return DevMode::kSingle;
  if (name == "obs") return DevMode::kObs;
  if (name == "any") return DevMode::kAny;
  throw std::invalid_argument("unknown deviation mode: " + name);
}

int multidev(ItemId o, const PrMap& q, const SemiDistribution& p, const DeviationConfig& cfg) {
  switch (cfg.mode) {
    case DevMode::kSingle:
      return deviates(q.get(cfg.target), p.get(cfg.target), cfg.d);
    case DevMode::kObs:
      if (p.contains(o)) return deviates(q.get(o), p.get(o), cfg.d);
      return q.get(o) >= cfg.p_min && q.contains(o) ? 1 : 0;
    case DevMode::kAny:
      for (const auto& [item, tp] : p) {
        if (deviates(q.get(item), tp, cfg.d)) return 1;
      }
      return 0;
  }
  return 0;
}

void GroundTruthSchedule::add(std::uint64_t start_t, SemiDistribution sd) {
  std::uint64_t min_start = entries_.empty() ? 1 : entries_.back().start_t + 1;
  if (start_t < min_start || (entries_.empty() && start_t != 1)) {
    throw std::invalid_argument("schedule start times must increase from 1");
  }
  entries_.push_back({start_t, std::move(sd)});
}

const SemiDistribution& GroundTruthSchedule::at(std::uint64_t t) const {
  if (entries_.empty() || t < 1) throw std::out_of_range("schedule does not cover t");
  auto it = std::upper_bound(entries_.begin(), entries_.end(), t,
                             [](std::uint64_t v, const Entry& e) { return v < e.start_t; });
  return std::prev(it)->sd;
}

double optimal_logloss(const std::vector<ItemId>& obs, const GroundTruthSchedule& schedule) {
  if (obs.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t < obs.size(); ++t) {
    const SemiDistribution& p = schedule.at(t + 1);
    double prob = p.get(obs[t]);
    total -= std::log(prob > 0.0 ? prob : p.unallocated());
  }
  return total / static_cast<double>(obs.size());
}

SignTestResult sign_test(const std::vector<double>& losses_a, const std::vector<double>& losses_b) {
  if (losses_a.size() != losses_b.size()) {
    throw std::invalid_argument("sign_test: loss sequences differ in length");
  }
  SignTestResult r;
  for (std::size_t i = 0; i < losses_a.size(); ++i) {
    if (losses_a[i] < losses_b[i]) {
      ++r.wins_a;
    } else if (losses_b[i] < losses_a[i]) {
      ++r.wins_b;
    } else {
      ++r.ties;
    }
  }
  std::size_t n = r.wins_a + r.wins_b;
  if (n == 0) return r;
  std::size_t k = std::min(r.wins_a, r.wins_b);
  double log_half_n = static_cast<double>(n) * std::log(0.5);
  double lgn = std::lgamma(static_cast<double>(n) + 1.0);
  double tail = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    double log_c = lgn - std::lgamma(static_cast<double>(i) + 1.0) -
                   std::lgamma(static_cast<double>(n - i) + 1.0);
    tail += std::exp(log_c + log_half_n);
  }
  r.p_value = std::min(1.0, 2.0 * tail);
  return r;
}

}  // namespace sparsema
