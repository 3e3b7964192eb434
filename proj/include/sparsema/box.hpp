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
#include <unordered_map>

#include "sparsema/predictor.hpp"

namespace sparsema {

/**
 * @brief Sliding window over the last K observations with exact counts.
 */
class BoxPredictor : public Predictor {
 public:
  explicit BoxPredictor(std::size_t k = 100);

  PrMap predict() const override;
  double estimate(ItemId item) const override;
  void update(ItemId o) override;
  std::string kind() const override { return "box"; }
  void write_snapshot(const std::filesystem::path& dir) const override;

  const std::deque<ItemId>& window() const { return window_; }
  const std::unordered_map<ItemId, std::uint64_t>& counts() const { return counts_; }

 private:
  std::size_t k_;
  std::deque<ItemId> window_;
  std::unordered_map<ItemId, std::uint64_t> counts_;
};

}  // namespace sparsema
