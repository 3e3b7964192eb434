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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <unordered_map>
#include <vector>

#include "sparsema/sd.hpp"

namespace sparsema {

/**
 * @brief Bounded list of count cells for one item, newest (cell0) first.
 *
 * A positive update opens a new cell with count 1, a negative update
 * increments cell0. Only cell0 ever changes count.
 */
class Queue {
 public:
  explicit Queue(std::size_t qcap = 3);

  void positive_update();
  void negative_update();

  // 0 while fewer than two cells, else (nc - 1) / (count() - 1).
  double pr() const;

  // Same ratio over the completed cells only (cell0 excluded).
  double completed_cells_pr() const;

  // Sum over all cells.
  std::uint64_t count() const;

  std::uint64_t cell0() const { return cells_.empty() ? 0 : cells_.front(); }
  std::size_t size() const { return cells_.size(); }
  std::size_t capacity() const { return qcap_; }
  const std::vector<std::uint64_t>& cells() const { return cells_; }

 private:
  std::vector<std::uint64_t> cells_;
  std::size_t qcap_;
};

struct PruneConfig {
  std::size_t s1 = 100;         // size limit
  std::uint64_t s2 = 100000;    // staleness limit on cell0
  std::uint64_t heartbeat = 1000;
};

struct QueueInfo {
  double pr = 0.0;
  std::uint64_t count = 0;
};

/**
 * @brief item -> Queue map with the shared positive/negative update rule.
 */
class QueueMap {
 public:
  explicit QueueMap(std::size_t qcap = 3) : qcap_(qcap) {}

  // Allocates o's queue if needed, positive update on it, negative on all
  // others.
  void update(ItemId o);

  // (0, 0) when o has no queue.
  QueueInfo info(ItemId o) const;

  // Drops stale items, then cuts to s1 when at least 2 * s1 remain.
  // Returns the removed ids.
  std::vector<ItemId> prune(const PruneConfig& cfg);

  PrMap predict() const;
  double estimate(ItemId o) const;

  const Queue* find(ItemId o) const;
  const std::unordered_map<ItemId, Queue>& queues() const { return queues_; }
  std::size_t size() const { return queues_.size(); }
  std::size_t qcap() const { return qcap_; }

  void write_csv(const std::filesystem::path& file) const;

 private:
  std::unordered_map<ItemId, Queue> queues_;
  std::size_t qcap_;
};

// Ranks (item, cell0 count) pairs and returns the ids to drop: stale ones
// first, then the highest counts until `s1` survive. Ties drop the larger id.
std::vector<ItemId> select_pruned(std::vector<std::pair<ItemId, std::uint64_t>> c0,
                                  const PruneConfig& cfg);

/**
 * @brief Queue of clock stamps, newest first.
 *
 * Equivalent to Queue with counts implied by stamp differences; only the
 * observed item's queue is touched on an update.
 */
class TimestampQueue {
 public:
  explicit TimestampQueue(std::size_t qcap = 3);

  void positive_update(std::uint64_t clock);

  double pr(std::uint64_t clock) const;
  std::uint64_t count(std::uint64_t clock) const;
  std::uint64_t cell0(std::uint64_t clock) const;
  std::uint64_t oldest() const { return stamps_.back(); }

  void shift(std::uint64_t offset);

  std::size_t size() const { return stamps_.size(); }
  const std::vector<std::uint64_t>& stamps() const { return stamps_; }

 private:
  std::vector<std::uint64_t> stamps_;
  std::size_t qcap_;
};

}  // namespace sparsema
