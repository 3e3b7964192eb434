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

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sparsema/sd.hpp"

namespace sparsema {

/**
 * @brief Prequential predictor: predict() before each observation, then
 * update() with it.
 */
class Predictor {
 public:
  virtual ~Predictor() = default;

  // Current item -> PR estimates. Never mutates state.
  virtual PrMap predict() const = 0;

  // Estimate for a single item; same value predict() would report.
  virtual double estimate(ItemId item) const = 0;

  virtual void update(ItemId o) = 0;

  // Registered kind name, e.g. "dyal".
  virtual std::string kind() const = 0;

  // Writes manifest.csv plus one CSV per keyed store into dir.
  virtual void write_snapshot(const std::filesystem::path& dir) const = 0;
};

inline constexpr int kSnapshotVersion = 1;

// Helpers shared by the snapshot writers.
void write_manifest(const std::filesystem::path& dir, const std::string& kind,
                    const std::vector<std::pair<std::string, std::string>>& fields);
void write_weights_csv(const std::filesystem::path& file, const std::string& value_column,
                       const PrMap& weights);

}  // namespace sparsema
