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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gtest/gtest.h"
#include "sparsema/synth.hpp"

namespace sparsema {
namespace {

std::size_t count_of(const std::vector<ItemId>& v, ItemId x) {
  return static_cast<std::size_t>(std::count(v.begin(), v.end(), x));
}

double mean_periods(SingleMode mode, std::uint64_t o_min, int runs) {
  GenConfig cfg;
  cfg.o_min = o_min;
  double total = 0.0;
  for (int r = 0; r < runs; ++r) {
    Rng rng(derive_seed(100, r));
    total += static_cast<double>(gen_single_nonstationary(mode, cfg, 10000, rng).schedule.size());
  }
  return total / runs;
}

double mean_periods_multi(std::uint64_t o_min, int runs) {
  double total = 0.0;
  for (int r = 0; r < runs; ++r) {
    GenConfig cfg;
    cfg.o_min = o_min;
    cfg.seed = derive_seed(200, r);
    SequenceGenerator gen(cfg);
    total += static_cast<double>(gen.gen_sequence().schedule.size());
  }
  return total / runs;
}

// ---------------------------------------------------------------------------
// Binary streams

TEST(GenBinaryStationary, CertainItem) {
  Rng rng(1);
  GeneratedStream s = gen_binary_stationary(1.0, 500, rng);
  EXPECT_EQ(count_of(s.observations, 1), 500u);
}

TEST(GenBinaryStationary, BinomialCount) {
  Rng rng(2);
  GeneratedStream s = gen_binary_stationary(0.1, 10000, rng);
  ASSERT_EQ(s.observations.size(), 10000u);
  double ones = static_cast<double>(count_of(s.observations, 1));
  EXPECT_NEAR(ones, 1000.0, 3.0 * 30.0);
  EXPECT_EQ(count_of(s.observations, 0) + count_of(s.observations, 1), 10000u);
}

TEST(GenBinaryStationary, SingleScheduleEntry) {
  Rng rng(3);
  GeneratedStream s = gen_binary_stationary(0.3, 10, rng);
  ASSERT_EQ(s.schedule.size(), 1u);
  EXPECT_EQ(s.schedule.entries()[0].start_t, 1u);
  EXPECT_DOUBLE_EQ(s.schedule.at(1).get(1), 0.3);
  EXPECT_DOUBLE_EQ(s.schedule.at(1).get(0), 0.7);
}

TEST(GenSingleNonstationary, OscillatePeriodCount) {
  EXPECT_NEAR(mean_periods(SingleMode::kOscillate, 10, 40), 25.0, 3.0);
}

TEST(GenSingleNonstationary, UniformPeriodCounts) {
  EXPECT_NEAR(mean_periods(SingleMode::kUniform, 10, 40), 200.0, 30.0);
  EXPECT_NEAR(mean_periods(SingleMode::kUniform, 50, 40), 50.0, 10.0);
}

TEST(GenSingleNonstationary, PeriodConstraints) {
  for (SingleMode mode : {SingleMode::kOscillate, SingleMode::kUniform}) {
    GenConfig cfg;
    cfg.o_min = 50;
    if (mode == SingleMode::kUniform) cfg.l_min = 1000;
    Rng rng(4);
    GeneratedStream s = gen_single_nonstationary(mode, cfg, 30000, rng);
    const auto& e = s.schedule.entries();
    ASSERT_GE(e.size(), 2u);
    double prev_tp = -1.0;
    for (std::size_t j = 0; j + 1 < e.size(); ++j) {
      std::uint64_t len = e[j + 1].start_t - e[j].start_t;
      std::vector<ItemId> period(s.observations.begin() + (e[j].start_t - 1),
                                 s.observations.begin() + (e[j + 1].start_t - 1));
      EXPECT_GE(count_of(period, 1), 50u);
      EXPECT_GE(len, mode == SingleMode::kOscillate ? 2000u : 1000u);
      double tp = e[j].sd.get(1);
      EXPECT_DOUBLE_EQ(e[j].sd.get(0), 1.0 - tp);
      if (mode == SingleMode::kOscillate) {
        EXPECT_TRUE(tp == kOscillateHigh || tp == kOscillateLow);
        EXPECT_NE(tp, prev_tp);
      } else {
        EXPECT_TRUE(tp >= 0.01 && tp <= 1.0);
      }
      prev_tp = tp;
    }
    EXPECT_EQ(s.observations.size(), 30000u);
  }
}

TEST(GenSingleNonstationary, StartFlag) {
  GenConfig cfg;
  Rng a(5), b(5);
  EXPECT_EQ(gen_single_nonstationary(SingleMode::kOscillate, cfg, 100, a, true).schedule.at(1).get(1),
            kOscillateHigh);
  EXPECT_EQ(gen_single_nonstationary(SingleMode::kOscillate, cfg, 100, b, false).schedule.at(1).get(1),
            kOscillateLow);
}

// ---------------------------------------------------------------------------
// GenSD

TEST(GenSd, BoundsAndMeanSupport) {
  GenConfig cfg;
  SequenceGenerator gen(cfg);
  SemiDistribution prev;
  double support = 0.0;
  std::set<ItemId> seen;
  for (int i = 0; i < 1000; ++i) {
    SemiDistribution p = gen.gen_sd(prev);
    ASSERT_GE(p.min(), 0.01);
    ASSERT_LE(p.allocated(), 0.99 + kSumSlack);
    ASSERT_LE(p.unallocated(), 0.01 + 0.01 + kSumSlack);
    for (ItemId id : p.support()) {
      ASSERT_FALSE(is_noise_item(id));
      ASSERT_TRUE(seen.insert(id).second) << "id reused without recycle";
    }
    support += static_cast<double>(p.size());
    prev = p;
  }
  EXPECT_NEAR(support / 1000.0, 5.0, 2.0);
}

TEST(GenSd, CapLimitsEachProbability) {
  GenConfig cfg;
  cfg.p_max = 0.1;
  SequenceGenerator gen(cfg);
  double support = 0.0;
  for (int i = 0; i < 200; ++i) {
    SemiDistribution p = gen.gen_sd({});
    for (const auto& [id, v] : p) ASSERT_LE(v, 0.1);
    ASSERT_GE(p.size(), 10u);
    support += static_cast<double>(p.size());
  }
  EXPECT_GT(support / 200.0, 10.0);
}

TEST(GenSd, RecycleUsesLowIds) {
  GenConfig cfg;
  cfg.recycle = true;
  SequenceGenerator gen(cfg);
  std::set<std::size_t> sizes;
  for (int i = 0; i < 200; ++i) {
    SemiDistribution p = gen.gen_sd({});
    std::vector<ItemId> expect;
    for (ItemId k = 1; k <= p.size(); ++k) expect.push_back(k);
    ASSERT_EQ(p.support(), expect);
    sizes.insert(p.size());
  }
  EXPECT_GT(sizes.size(), 1u);
}

// ---------------------------------------------------------------------------
// Subsequences and draws

TEST(GenSubseq, PointMass) {
  GenConfig cfg;
  cfg.o_min = 3;
  SequenceGenerator gen(cfg);
  EXPECT_EQ(gen.gen_subseq(SemiDistribution({{7, 1.0}})), (std::vector<ItemId>{7, 7, 7}));
}

TEST(GenSubseq, EveryItemReachesOmin) {
  GenConfig cfg;
  cfg.o_min = 10;
  SequenceGenerator gen(cfg);
  for (int i = 0; i < 100; ++i) {
    auto s = gen.gen_subseq(SemiDistribution({{1, 0.5}, {2, 0.5}}));
    EXPECT_GE(s.size(), 20u);
    EXPECT_GE(count_of(s, 1), 10u);
    EXPECT_GE(count_of(s, 2), 10u);
  }
}

TEST(GenSubseq, LengthScalesWithSmallestProbability) {
  GenConfig cfg;
  cfg.o_min = 20;
  SequenceGenerator gen(cfg);
  double total = 0.0;
  const int runs = 300;
  for (int i = 0; i < runs; ++i) {
    total += static_cast<double>(gen.gen_subseq(SemiDistribution({{1, 0.8}, {2, 0.1}})).size());
  }
  // Negative binomial waiting time for 20 hits at 0.1 has mean 200.
  EXPECT_NEAR(total / runs, 200.0, 15.0);
}

TEST(GenSubseq, RespectsLmin) {
  GenConfig cfg;
  cfg.o_min = 1;
  cfg.l_min = 50;
  SequenceGenerator gen(cfg);
  EXPECT_EQ(gen.gen_subseq(SemiDistribution({{1, 1.0}})).size(), 50u);
}

TEST(DrawItem, Examples) {
  GenConfig cfg;
  SequenceGenerator gen(cfg);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(gen.draw_item(SemiDistribution({{4, 1.0}})), 4u);
  std::set<ItemId> noise;
  for (int i = 0; i < 100; ++i) {
    ItemId id = gen.draw_item(SemiDistribution());
    ASSERT_TRUE(is_noise_item(id));
    ASSERT_TRUE(noise.insert(id).second);
  }
  const int n = 100000;
  std::size_t hits = 0;
  for (int i = 0; i < n; ++i) hits += gen.draw_item(SemiDistribution({{4, 0.5}})) == 4;
  EXPECT_NEAR(static_cast<double>(hits) / n, 0.5, 3.0 * std::sqrt(0.25 / n));
}

// ---------------------------------------------------------------------------
// Full sequences

TEST(GenSequence, StablePeriodCounts) {
  EXPECT_NEAR(mean_periods_multi(50, 100), 4.0, 1.0);
  EXPECT_NEAR(mean_periods_multi(10, 100), 17.0, 3.0);
}

TEST(GenSequence, NoiseUniqueAndScheduleConsistent) {
  GenConfig cfg;
  cfg.seed = 9;
  SequenceGenerator gen(cfg);
  GeneratedStream s = gen.gen_sequence();
  EXPECT_GE(s.observations.size(), cfg.desired_len);
  std::map<ItemId, std::size_t> noise;
  for (std::size_t t = 0; t < s.observations.size(); ++t) {
    ItemId o = s.observations[t];
    if (is_noise_item(o)) {
      ++noise[o];
    } else {
      ASSERT_TRUE(s.schedule.at(t + 1).contains(o)) << t;
    }
  }
  for (const auto& [id, c] : noise) ASSERT_EQ(c, 1u);
}

TEST(GenSequence, PeriodFrequenciesMatchSd) {
  GenConfig cfg;
  cfg.o_min = 50;
  SequenceGenerator gen(cfg);
  SemiDistribution p({{1, 0.4}, {2, 0.05}, {3, 0.3}});
  std::vector<ItemId> obs;
  while (obs.size() < 100000) {
    auto sub = gen.gen_subseq(p);
    obs.insert(obs.end(), sub.begin(), sub.end());
  }
  double n = static_cast<double>(obs.size());
  std::size_t noise = 0;
  for (ItemId o : obs) noise += is_noise_item(o);
  for (auto [id, v] : p) {
    double f = static_cast<double>(count_of(obs, id)) / n;
    EXPECT_NEAR(f, v, 3.0 * std::sqrt(v * (1.0 - v) / n)) << id;
  }
  double u = p.unallocated();
  EXPECT_NEAR(static_cast<double>(noise) / n, u, 3.0 * std::sqrt(u * (1.0 - u) / n));
}

TEST(GenSequence, Deterministic) {
  GenConfig cfg;
  cfg.seed = 77;
  GeneratedStream a = SequenceGenerator(cfg).gen_sequence();
  GeneratedStream b = SequenceGenerator(cfg).gen_sequence();
  EXPECT_EQ(a.observations, b.observations);
  std::ostringstream sa, sb;
  write_schedule_csv(sa, a.schedule);
  write_schedule_csv(sb, b.schedule);
  EXPECT_EQ(sa.str(), sb.str());
  cfg.seed = 78;
  EXPECT_NE(SequenceGenerator(cfg).gen_sequence().observations, a.observations);
}

TEST(GenConfig, Validation) {
  GenConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  cfg.p_min = 0.5;
  cfg.p_ns = 0.5;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = GenConfig{};
  cfg.p_max = 0.005;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
}

TEST(StreamFiles, RoundTrip) {
  auto dir = std::filesystem::temp_directory_path() / "sparsema_stream_test";
  std::filesystem::create_directories(dir);
  GenConfig cfg;
  cfg.seed = 5;
  GeneratedStream s = SequenceGenerator(cfg).gen_sequence();
  write_stream(dir / "items.txt", dir / "schedule.csv", s);
  GeneratedStream r = read_stream(dir / "items.txt", dir / "schedule.csv");
  EXPECT_EQ(r.observations, s.observations);
  ASSERT_EQ(r.schedule.size(), s.schedule.size());
  for (std::size_t j = 0; j < s.schedule.size(); ++j) {
    EXPECT_EQ(r.schedule.entries()[j].start_t, s.schedule.entries()[j].start_t);
    EXPECT_EQ(r.schedule.entries()[j].sd, s.schedule.entries()[j].sd);
  }
  std::ifstream in(dir / "schedule.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "start_t,item_id,prob");
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace sparsema
