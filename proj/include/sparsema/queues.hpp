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

struct QueuesConfig {
  std::size_t qcap = 3;
  PruneConfig prune;
  // Report the completed-cells-only estimate instead of the default.
  bool completed_cells_only = false;
};

/**
 * @brief One count queue per item; PR read off the queue cells.
 */
class QueuesPredictor : public Predictor {
 public:
  explicit QueuesPredictor(const QueuesConfig& cfg = {});

  PrMap predict() const override;
  double estimate(ItemId item) const override;
  void update(ItemId o) override;
  std::string kind() const override { return "queues"; }
  void write_snapshot(const std::filesystem::path& dir) const override;

  const QueueMap& queues() const { return queues_; }

 private:
  QueuesConfig cfg_;
  QueueMap queues_;
  std::uint64_t t_ = 0;
};

struct TimestampQueuesConfig {
  std::size_t qcap = 3;
  PruneConfig prune;
  // Stamps are rebased once the clock passes this value.
  std::uint64_t rebase_above = std::uint64_t{1} << 62;
};

/**
 * @brief Queues variant storing clock stamps; an update touches only the
 * observed item's queue.
 */
class TimestampQueuesPredictor : public Predictor {
 public:
  explicit TimestampQueuesPredictor(const TimestampQueuesConfig& cfg = {});

  PrMap predict() const override;
  double estimate(ItemId item) const override;
  void update(ItemId o) override;
  std::string kind() const override { return "ts_queues"; }
  void write_snapshot(const std::filesystem::path& dir) const override;

  std::uint64_t clock() const { return clock_; }
  const std::unordered_map<ItemId, TimestampQueue>& queues() const { return queues_; }

 private:
  void prune();
  void rebase();

  TimestampQueuesConfig cfg_;
  std::unordered_map<ItemId, TimestampQueue> queues_;
  std::uint64_t clock_ = 0;
  std::uint64_t t_ = 0;
};

}  // namespace sparsema
