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

#include "sparsema/predictor.hpp"

namespace sparsema {

// max(1 / (1 / beta + 1), beta_min).
double decay_rate(double beta, double beta_min);

struct EmaConfig {
  double beta = 0.01;       // initial rate
  bool harmonic = false;    // decay beta after each update
  double beta_min = 0.001;  // floor for harmonic decay
  // Weights that fall below this are forgotten. 0 keeps every entry.
  double drop_below = 1e-4;
};

/**
 * @brief Sparse EMA: weaken every weight by (1 - beta), then add beta to the
 * observed item.
 */
class EmaPredictor : public Predictor {
 public:
  explicit EmaPredictor(const EmaConfig& cfg);

  static EmaPredictor static_rate(double beta);
  // Starts at rate 1 and decays harmonically down to beta_min.
  static EmaPredictor harmonic(double beta_min);

  PrMap predict() const override { return weights_; }
  double estimate(ItemId item) const override { return weights_.get(item); }
  void update(ItemId o) override;
  std::string kind() const override { return cfg_.harmonic ? "harmonic_ema" : "ema"; }
  void write_snapshot(const std::filesystem::path& dir) const override;

  // Replaces weights and current rate, e.g. when restoring a snapshot.
  void set_state(PrMap weights, double beta);

  double beta() const { return beta_; }
  const PrMap& weights() const { return weights_; }

 private:
  EmaConfig cfg_;
  double beta_;
  PrMap weights_;
  std::uint64_t t_ = 0;
};

}  // namespace sparsema
