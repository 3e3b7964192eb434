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

#include "sparsema/box.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace sparsema {

BoxPredictor::BoxPredictor(std::size_t k) : k_(k) {
  if (k == 0) throw std::invalid_argument("box window must be positive");
}

PrMap BoxPredictor::predict() const {
  PrMap out;
  if (window_.empty()) return out;
  double n = static_cast<double>(window_.size());
  out.reserve(counts_.size());
  for (const auto& [item, c] : counts_) out.set(item, static_cast<double>(c) / n);
  return out;
}

double BoxPredictor::estimate(ItemId item) const {
  auto it = counts_.find(item);
  if (it == counts_.end()) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(window_.size());
}

void BoxPredictor::update(ItemId o) {
  window_.push_back(o);
  ++counts_[o];
  if (window_.size() > k_) {
    ItemId old = window_.front();
    window_.pop_front();
    auto it = counts_.find(old);
    if (--it->second == 0) counts_.erase(it);
  }
}

void BoxPredictor::write_snapshot(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_manifest(dir, kind(),
                 {{"k", std::to_string(k_)}, {"window_size", std::to_string(window_.size())}});
  std::vector<std::pair<ItemId, std::uint64_t>> rows(counts_.begin(), counts_.end());
  std::sort(rows.begin(), rows.end());
  std::ofstream out(dir / "counts.csv");
  if (!out) throw std::runtime_error("cannot write " + (dir / "counts.csv").string());
  out << "item_id,count\n";
  for (const auto& [item, c] : rows) out << item << ',' << c << '\n';
  std::ofstream win(dir / "window.csv");
  win << "position,item_id\n";
  for (std::size_t i = 0; i < window_.size(); ++i) win << i << ',' << window_[i] << '\n';
}

}  // namespace sparsema
