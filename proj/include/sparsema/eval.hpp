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

#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "sparsema/sd.hpp"

namespace sparsema {

struct RefereeConfig {
  std::uint64_t c_ns = 2;
  // Count only the last `window` observations. 0 means unbounded.
  std::size_t window = 0;
};

/**
 * @brief Flags an observation as noise when it was seen at most c_ns times
 * before.
 */
class Referee {
 public:
  explicit Referee(const RefereeConfig& cfg = {}) : cfg_(cfg) {}

  // Tests the prior count, then records o.
  bool is_ns(ItemId o);

  std::uint64_t recent_frequency(ItemId o) const;
  // Sum of all recorded counts.
  std::uint64_t total() const { return total_; }
  const RefereeConfig& config() const { return cfg_; }

 private:
  RefereeConfig cfg_;
  std::unordered_map<ItemId, std::uint64_t> recent_freq_;
  std::deque<ItemId> window_;
  std::uint64_t total_ = 0;
};

// Bounded log-loss of observing o under FC(q). In [0, -ln p_ns].
double logloss_rule_ns(ItemId o, const PrMap& q, bool marked_ns, const FcConfig& cfg);
// Same, with q already passed through filter_cap.
double logloss_rule_ns_capped(ItemId o, const SemiDistribution& capped, bool marked_ns,
                              const FcConfig& cfg);

double avg_logloss_ns(const std::vector<PrMap>& preds, const std::vector<ItemId>& obs,
                      Referee& referee, const FcConfig& cfg);

// (1 - Q'(o))^2 + sum over i != o of Q'(i)^2, with Q' = FC(q).
double quad_rule(const PrMap& q, ItemId o, const FcConfig& cfg);
double quad_rule_capped(const SemiDistribution& capped, ItemId o);

// 1 iff p_hat is 0 or off from tp by a ratio above d.
int deviates(double p_hat, double tp, double d);
double dev_rate(const std::vector<double>& estimates, double tp, double d);

enum class DevMode { kSingle, kObs, kAny };

std::string to_string(DevMode mode);
DevMode parse_dev_mode(const std::string& name);

struct DeviationConfig {
  double d = 1.5;
  DevMode mode = DevMode::kObs;
  double p_min = 0.01;
  // Item tracked in single mode.
  ItemId target = 1;
};

// Deviation indicator of q against the true SD p at an observation o.
int multidev(ItemId o, const PrMap& q, const SemiDistribution& p, const DeviationConfig& cfg);

/**
 * @brief Piecewise-constant schedule of generating SDs, with 1-based,
 * strictly increasing start times.
 */
class GroundTruthSchedule {
 public:
  struct Entry {
    std::uint64_t start_t;
    SemiDistribution sd;
  };

  void add(std::uint64_t start_t, SemiDistribution sd);
  // SD generating the observation at time t (1-based).
  const SemiDistribution& at(std::uint64_t t) const;
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<Entry> entries_;
};

double optimal_logloss(const std::vector<ItemId>& obs, const GroundTruthSchedule& schedule);

struct SignTestResult {
  std::size_t wins_a = 0;
  std::size_t wins_b = 0;
  std::size_t ties = 0;
  double p_value = 1.0;
};

// Lower loss wins. Two-sided exact binomial p-value with ties dropped.
SignTestResult sign_test(const std::vector<double>& losses_a, const std::vector<double>& losses_b);

}  // namespace sparsema
