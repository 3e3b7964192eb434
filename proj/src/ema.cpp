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

#include "sparsema/ema.hpp"

#include <algorithm>
#include <stdexcept>

#include "sparsema/csv.hpp"

namespace sparsema {

double decay_rate(double beta, double beta_min) {
  return std::max(1.0 / (1.0 / beta + 1.0), beta_min);
}

EmaPredictor::EmaPredictor(const EmaConfig& cfg) : cfg_(cfg), beta_(cfg.beta) {
  if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) {
    throw std::invalid_argument("EMA rate must be in (0,1]");
  }
  if (cfg.harmonic && !(cfg.beta_min >= 0.0 && cfg.beta_min <= cfg.beta)) {
    throw std::invalid_argument("EMA beta_min must be in [0, beta]");
  }
}

EmaPredictor EmaPredictor::static_rate(double beta) {
  EmaConfig cfg;
  cfg.beta = beta;
  return EmaPredictor(cfg);
}

EmaPredictor EmaPredictor::harmonic(double beta_min) {
  EmaConfig cfg;
  cfg.beta = 1.0;
  cfg.harmonic = true;
  cfg.beta_min = beta_min;
  return EmaPredictor(cfg);
}

void EmaPredictor::update(ItemId o) {
  ++t_;
  double keep = 1.0 - beta_;
  double floor = cfg_.drop_below;
  weights_.update_all([&](ItemId item, double w) {
    double v = w * keep;
    return (item != o && v < floor) ? 0.0 : v;
  });
  weights_.set(o, std::min(weights_.get(o) + beta_, 1.0));
  if (cfg_.harmonic) beta_ = decay_rate(beta_, cfg_.beta_min);
}

void EmaPredictor::set_state(PrMap weights, double beta) {
  SemiDistribution check(weights);
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("EMA rate must be in (0,1]");
  weights_ = std::move(weights);
  beta_ = beta;
}

void EmaPredictor::write_snapshot(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  write_manifest(dir, kind(),
                 {{"t", std::to_string(t_)},
                  {"beta", format_double(beta_)},
                  {"beta_min", format_double(cfg_.beta_min)},
                  {"drop_below", format_double(cfg_.drop_below)}});
  write_weights_csv(dir / "weights.csv", "weight", weights_);
}

}  // namespace sparsema
