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
#include <unordered_map>

#include "sparsema/predictor.hpp"
#include "sparsema/queue.hpp"

namespace sparsema {

// q_count * KL(q_pr || ema_pr) between two Bernoulli distributions.
// Returns kInfinity when ema_pr is 0 or 1 and q_pr differs from it.
double binomial_significance(double ema_pr, double q_pr, std::uint64_t q_count);

struct DyalConfig {
  double beta_min = 0.01;
  double p_min = 0.01;
  double sig_thresh = 5.0;
  std::size_t qcap = 3;
  PruneConfig prune;
};

/**
 * @brief EMA weights, per-edge rates and per-edge queues of one DYAL
 * predictor.
 *
 * Keys of ema_map and rate_map are always equal, and a subset of the keys of
 * q_map.
 */
struct DyalState {
  explicit DyalState(const DyalConfig& c = {}) : cfg(c), q_map(c.qcap) {}

  DyalConfig cfg;
  PrMap ema_map;
  std::unordered_map<ItemId, double> rate_map;
  QueueMap q_map;
  std::uint64_t t = 0;
};

bool q_significantly_high(double ema_pr, double q_pr, std::uint64_t q_count, double thresh);
bool q_significantly_low(double ema_pr, double q_pr, std::uint64_t q_count, double thresh);

// Weakens, resets or drops every edge other than o. Returns 1 minus the sum
// of the remaining weights, o's included.
double weaken_edges(DyalState& s, ItemId o);

void dyal_update(DyalState& s, ItemId o);

/**
 * @brief Sparse EMA whose per-edge rates are reset from a queue estimate when
 * the two disagree significantly.
 */
class DyalPredictor : public Predictor {
 public:
  explicit DyalPredictor(const DyalConfig& cfg = {}) : state_(cfg) {}

  PrMap predict() const override { return state_.ema_map; }
  double estimate(ItemId item) const override { return state_.ema_map.get(item); }
  void update(ItemId o) override { dyal_update(state_, o); }
  std::string kind() const override { return "dyal"; }
  void write_snapshot(const std::filesystem::path& dir) const override;

  // Statistics over rate_map; 0 when it is empty.
  double max_rate() const;
  double median_rate() const;
  std::size_t out_degree() const { return state_.ema_map.size(); }

  const DyalState& state() const { return state_; }

 private:
  DyalState state_;
};

}  // namespace sparsema
