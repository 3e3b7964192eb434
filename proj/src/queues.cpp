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

#include "sparsema/queues.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace sparsema {

QueuesPredictor::QueuesPredictor(const QueuesConfig& cfg) : cfg_(cfg), queues_(cfg.qcap) {
  if (cfg.qcap < 2) throw std::invalid_argument("qcap must be at least 2");
}

PrMap QueuesPredictor::predict() const {
  if (!cfg_.completed_cells_only) return queues_.predict();
  PrMap out;
  for (const auto& [item, q] : queues_.queues()) out.set(item, q.completed_cells_pr());
  return out;
}

double QueuesPredictor::estimate(ItemId item) const {
  if (!cfg_.completed_cells_only) return queues_.estimate(item);
  const Queue* q = queues_.find(item);
  return q ? q->completed_cells_pr() : 0.0;
}

void QueuesPredictor::update(ItemId o) {
  queues_.update(o);
  ++t_;
  if (cfg_.prune.heartbeat != 0 && t_ % cfg_.prune.heartbeat == 0) queues_.prune(cfg_.prune);
}

void QueuesPredictor::write_snapshot(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_manifest(dir, kind(),
                 {{"t", std::to_string(t_)}, {"qcap", std::to_string(cfg_.qcap)}});
  queues_.write_csv(dir / "q_map.csv");
}

TimestampQueuesPredictor::TimestampQueuesPredictor(const TimestampQueuesConfig& cfg)
    : cfg_(cfg) {
  if (cfg.qcap < 2) throw std::invalid_argument("qcap must be at least 2");
}

PrMap TimestampQueuesPredictor::predict() const {
  PrMap out;
  out.reserve(queues_.size());
  for (const auto& [item, q] : queues_) out.set(item, q.pr(clock_));
  return out;
}

double TimestampQueuesPredictor::estimate(ItemId item) const {
  auto it = queues_.find(item);
  return it == queues_.end() ? 0.0 : it->second.pr(clock_);
}

void TimestampQueuesPredictor::update(ItemId o) {
  ++clock_;
  auto it = queues_.find(o);
  if (it == queues_.end()) it = queues_.emplace(o, TimestampQueue(cfg_.qcap)).first;
  it->second.positive_update(clock_);
  ++t_;
  if (cfg_.prune.heartbeat != 0 && t_ % cfg_.prune.heartbeat == 0) prune();
  if (clock_ > cfg_.rebase_above) rebase();
}

void TimestampQueuesPredictor::prune() {
  std::vector<std::pair<ItemId, std::uint64_t>> c0;
  c0.reserve(queues_.size());
  for (const auto& [item, q] : queues_) c0.emplace_back(item, q.cell0(clock_));
  for (ItemId item : select_pruned(std::move(c0), cfg_.prune)) queues_.erase(item);
}

void TimestampQueuesPredictor::rebase() {
  std::uint64_t oldest = clock_;
  for (const auto& [item, q] : queues_) oldest = std::min(oldest, q.oldest());
  for (auto& [item, q] : queues_) q.shift(oldest);
  clock_ -= oldest;
}

void TimestampQueuesPredictor::write_snapshot(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_manifest(dir, kind(),
                 {{"t", std::to_string(t_)},
                  {"clock", std::to_string(clock_)},
                  {"qcap", std::to_string(cfg_.qcap)}});
  std::vector<ItemId> ids;
  for (const auto& [item, q] : queues_) ids.push_back(item);
  std::sort(ids.begin(), ids.end());
  std::ofstream out(dir / "q_map.csv");
  if (!out) throw std::runtime_error("cannot write " + (dir / "q_map.csv").string());
  out << "item_id,stamps\n";
  for (ItemId item : ids) {
    out << item << ',';
    const auto& stamps = queues_.at(item).stamps();
    for (std::size_t i = 0; i < stamps.size(); ++i) out << (i ? ";" : "") << stamps[i];
    out << '\n';
  }
}

}  // namespace sparsema
