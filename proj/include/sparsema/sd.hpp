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
#include <initializer_list>
#include <iosfwd>
#include <limits>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sparsema {

using ItemId = std::uint64_t;

// Holds the unallocated mass of an augmented distribution. No generator or
// ingester ever hands out this id.
inline constexpr ItemId kUnallocatedItem = std::numeric_limits<ItemId>::max();

// Slack on the sum <= 1 invariant of a semi-distribution.
inline constexpr double kSumSlack = 1e-12;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/**
 * @brief Sparse item -> probability weight map.
 *
 * Values are kept in [0, 1] and zero entries are never stored, so contains()
 * doubles as a positivity test. The sum is unconstrained.
 */
class PrMap {
 public:
  using Map = std::unordered_map<ItemId, double>;
  using const_iterator = Map::const_iterator;

  PrMap() = default;
  PrMap(std::initializer_list<std::pair<const ItemId, double>> entries);

  double get(ItemId item) const;
  bool contains(ItemId item) const { return entries_.count(item) != 0; }

  // Setting 0 erases the entry. Throws std::invalid_argument outside [0, 1].
  void set(ItemId item, double value);
  void erase(ItemId item) { entries_.erase(item); }
  void clear() { entries_.clear(); }
  void reserve(std::size_t n) { entries_.reserve(n); }

  // Replaces every value v of item i with fn(i, v); results of 0 are erased.
  template <typename Fn>
  void update_all(Fn fn) {
    for (auto it = entries_.begin(); it != entries_.end();) {
      double v = fn(it->first, it->second);
      if (v == 0.0) {
        it = entries_.erase(it);
      } else {
        it->second = v;
        ++it;
      }
    }
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  double sum() const;
  double max_value() const;

  const_iterator begin() const { return entries_.begin(); }
  const_iterator end() const { return entries_.end(); }

  // Entries ordered by item id.
  std::vector<std::pair<ItemId, double>> sorted() const;

  bool operator==(const PrMap& other) const { return entries_ == other.entries_; }

 private:
  Map entries_;
};

/**
 * @brief A PrMap whose values lie in (0, 1] and sum to at most 1.
 *
 * Construction validates the invariant and throws std::invalid_argument when
 * it is broken by more than kSumSlack.
 */
class SemiDistribution {
 public:
  SemiDistribution() = default;
  explicit SemiDistribution(PrMap entries);
  SemiDistribution(std::initializer_list<std::pair<const ItemId, double>> entries);

  double get(ItemId item) const { return entries_.get(item); }
  bool contains(ItemId item) const { return entries_.contains(item); }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // a(Q), u(Q) = 1 - a(Q) and min(Q). min() of an empty SD is 0.
  double allocated() const { return allocated_; }
  double unallocated() const { return 1.0 - allocated_; }
  double min() const;
  std::vector<ItemId> support() const;

  const PrMap& map() const { return entries_; }
  PrMap::const_iterator begin() const { return entries_.begin(); }
  PrMap::const_iterator end() const { return entries_.end(); }

  bool operator==(const SemiDistribution& other) const {
    return entries_ == other.entries_;
  }

 private:
  PrMap entries_;
  double allocated_ = 0.0;
};

struct FcConfig {
  double p_min = 0.01;
  double p_ns = 0.01;
};

// Throws std::invalid_argument when the thresholds are outside [0, 1).
void validate(const FcConfig& cfg);

// Multiplies every value by alpha and drops results below p_min.
PrMap scale_drop(const PrMap& m, double alpha, double p_min);

// Filter entries below p_min, then scale so that the sum is at most
// 1 - p_ns, then filter again.
SemiDistribution filter_cap(const PrMap& m, const FcConfig& cfg);

// Adds kUnallocatedItem with weight u(P) so the result sums to 1.
SemiDistribution augment(const SemiDistribution& p);

double entropy(const SemiDistribution& p);

// Returns kInfinity when some P(i) > 0 has Q(i) = 0.
double kl(const SemiDistribution& p, const SemiDistribution& q);

// KL with the denominator floored at p_ns.
double kl_bounded(const SemiDistribution& p, const SemiDistribution& q, double p_ns);

double kl_ns(const SemiDistribution& p, const PrMap& q, const FcConfig& cfg);

// Root above p_ns of p_ns = p0 * (1 - p0)^((1 - p0) / p0), by bisection.
double distortion_threshold(double p_ns);

// `item_id,prob` rows sorted by id, with a header line.
void write_sd_csv(std::ostream& out, const SemiDistribution& p);
SemiDistribution read_sd_csv(std::istream& in);

}  // namespace sparsema
