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

#include "sparsema/queue.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace sparsema {

Queue::Queue(std::size_t qcap) : qcap_(qcap) {
  if (qcap < 2) throw std::invalid_argument("queue capacity must be at least 2");
  cells_.reserve(qcap);
}

void Queue::positive_update() {
  if (cells_.size() < qcap_) {
    cells_.insert(cells_.begin(), 1);
  } else {
    std::rotate(cells_.rbegin(), cells_.rbegin() + 1, cells_.rend());
    cells_.front() = 1;
  }
}

void Queue::negative_update() {
  if (!cells_.empty()) ++cells_.front();
}

double Queue::pr() const {
  if (cells_.size() <= 1) return 0.0;
  return static_cast<double>(cells_.size() - 1) / static_cast<double>(count() - 1);
}

double Queue::completed_cells_pr() const {
  if (cells_.size() <= 2) return 0.0;
  std::uint64_t total = std::accumulate(cells_.begin() + 1, cells_.end(), std::uint64_t{0});
  return static_cast<double>(cells_.size() - 2) / static_cast<double>(total - 1);
}

std::uint64_t Queue::count() const {
  return std::accumulate(cells_.begin(), cells_.end(), std::uint64_t{0});
}

void QueueMap::update(ItemId o) {
  for (auto& [item, q] : queues_) {
    if (item != o) q.negative_update();
  }
  auto it = queues_.find(o);
  if (it == queues_.end()) it = queues_.emplace(o, Queue(qcap_)).first;
  it->second.positive_update();
}

QueueInfo QueueMap::info(ItemId o) const {
  auto it = queues_.find(o);
  if (it == queues_.end()) return {};
  return {it->second.pr(), it->second.count()};
}

std::vector<ItemId> select_pruned(std::vector<std::pair<ItemId, std::uint64_t>> c0,
                                  const PruneConfig& cfg) {
  std::vector<ItemId> dropped;
  std::vector<std::pair<ItemId, std::uint64_t>> kept;
  kept.reserve(c0.size());
  for (const auto& entry : c0) {
    if (entry.second > cfg.s2) {
      dropped.push_back(entry.first);
    } else {
      kept.push_back(entry);
    }
  }
  if (kept.size() >= 2 * cfg.s1) {
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first > b.first;
    });
    std::size_t excess = kept.size() - cfg.s1;
    for (std::size_t i = 0; i < excess; ++i) dropped.push_back(kept[i].first);
  }
  return dropped;
}

std::vector<ItemId> QueueMap::prune(const PruneConfig& cfg) {
  std::vector<std::pair<ItemId, std::uint64_t>> c0;
  c0.reserve(queues_.size());
  for (const auto& [item, q] : queues_) c0.emplace_back(item, q.cell0());
  std::vector<ItemId> dropped = select_pruned(std::move(c0), cfg);
  for (ItemId item : dropped) queues_.erase(item);
  std::sort(dropped.begin(), dropped.end());
  return dropped;
}

PrMap QueueMap::predict() const {
  PrMap out;
  out.reserve(queues_.size());
  for (const auto& [item, q] : queues_) out.set(item, q.pr());
  return out;
}

double QueueMap::estimate(ItemId o) const {
  auto it = queues_.find(o);
  return it == queues_.end() ? 0.0 : it->second.pr();
}

const Queue* QueueMap::find(ItemId o) const {
  auto it = queues_.find(o);
  return it == queues_.end() ? nullptr : &it->second;
}

void QueueMap::write_csv(const std::filesystem::path& file) const {
  std::vector<ItemId> ids;
  for (const auto& [item, q] : queues_) ids.push_back(item);
  std::sort(ids.begin(), ids.end());
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "item_id,cells\n";
  for (ItemId item : ids) {
    out << item << ',';
    const auto& cells = queues_.at(item).cells();
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? ";" : "") << cells[i];
    out << '\n';
  }
}

TimestampQueue::TimestampQueue(std::size_t qcap) : qcap_(qcap) {
  if (qcap < 2) throw std::invalid_argument("queue capacity must be at least 2");
  stamps_.reserve(qcap);
}

void TimestampQueue::positive_update(std::uint64_t clock) {
  if (stamps_.size() < qcap_) {
    stamps_.insert(stamps_.begin(), clock);
  } else {
    std::rotate(stamps_.rbegin(), stamps_.rbegin() + 1, stamps_.rend());
    stamps_.front() = clock;
  }
}

double TimestampQueue::pr(std::uint64_t clock) const {
  if (stamps_.size() <= 1) return 0.0;
  return static_cast<double>(stamps_.size() - 1) / static_cast<double>(clock - oldest());
}

std::uint64_t TimestampQueue::count(std::uint64_t clock) const {
  return stamps_.empty() ? 0 : clock - oldest() + 1;
}

std::uint64_t TimestampQueue::cell0(std::uint64_t clock) const {
  return stamps_.empty() ? 0 : clock - stamps_.front() + 1;
}

void TimestampQueue::shift(std::uint64_t offset) {
  for (auto& s : stamps_) s -= offset;
}

}  // namespace sparsema
