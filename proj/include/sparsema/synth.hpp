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
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "sparsema/eval.hpp"
#include "sparsema/rng.hpp"
#include "sparsema/sd.hpp"

namespace sparsema {

// Noise ids start here; salient ids stay below.
inline constexpr ItemId kNoiseBase = ItemId{1} << 32;

inline bool is_noise_item(ItemId id) { return id >= kNoiseBase && id != kUnallocatedItem; }

struct GenConfig {
  double p_min = 0.01;
  double p_ns = 0.01;
  double p_max = 1.0;
  std::uint64_t o_min = 50;
  std::uint64_t l_min = 0;
  bool recycle = false;
  std::uint64_t desired_len = 10000;
  std::uint64_t seed = 1;
};

// Throws std::invalid_argument on inconsistent settings.
void validate(const GenConfig& cfg);

struct GeneratedStream {
  std::vector<ItemId> observations;
  GroundTruthSchedule schedule;
};

// iid items from {1: tp, 0: 1 - tp}.
GeneratedStream gen_binary_stationary(double tp, std::size_t n, Rng& rng);

enum class SingleMode {
  kOscillate,  // tp alternates between 0.25 and 0.025
  kUniform,    // tp redrawn from U(0.01, 1.0)
};

inline constexpr double kOscillateHigh = 0.25;
inline constexpr double kOscillateLow = 0.025;

// Binary stream whose tp for item 1 changes between stable periods. Uses
// cfg.o_min and, in uniform mode, cfg.l_min.
GeneratedStream gen_single_nonstationary(SingleMode mode, const GenConfig& cfg, std::size_t n,
                                         Rng& rng, bool start_high = true);

/**
 * @brief Multi-item stream generator: a sequence of random SDs, each held for
 * one stable period, with unique noise items filling the unallocated mass.
 */
class SequenceGenerator {
 public:
  explicit SequenceGenerator(const GenConfig& cfg);

  SemiDistribution gen_sd(const SemiDistribution& prev);
  std::vector<ItemId> gen_subseq(const SemiDistribution& p);
  ItemId draw_item(const SemiDistribution& p);
  GeneratedStream gen_sequence();

  ItemId unique_noise_item() { return next_noise_++; }

  Rng& rng() { return rng_; }
  const GenConfig& config() const { return cfg_; }

 private:
  GenConfig cfg_;
  Rng rng_;
  ItemId next_salient_ = 1;
  ItemId next_noise_ = kNoiseBase;
};

// Item-per-line text plus `start_t,item_id,prob` schedule rows.
void write_stream(const std::filesystem::path& items_file,
                  const std::filesystem::path& schedule_file, const GeneratedStream& s);
GeneratedStream read_stream(const std::filesystem::path& items_file,
                            const std::filesystem::path& schedule_file);
void write_schedule_csv(std::ostream& out, const GroundTruthSchedule& schedule);
GroundTruthSchedule read_schedule_csv(std::istream& in);

}  // namespace sparsema
