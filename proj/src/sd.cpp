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

#include "sparsema/sd.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sparsema/csv.hpp"

namespace sparsema {

PrMap::PrMap(std::initializer_list<std::pair<const ItemId, double>> entries) {
  for (const auto& [item, value] : entries) set(item, value);
}

double PrMap::get(ItemId item) const {
  auto it = entries_.find(item);
  return it == entries_.end() ? 0.0 : it->second;
}

void PrMap::set(ItemId item, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument("PrMap value out of [0,1]: " + std::to_string(value));
  }
  if (value == 0.0) {
    entries_.erase(item);
  } else {
    entries_[item] = value;
  }
}

double PrMap::sum() const {
  double s = 0.0;
  for (const auto& [item, value] : entries_) s += value;
  return s;
}

double PrMap::max_value() const {
  double m = 0.0;
  for (const auto& [item, value] : entries_) m = std::max(m, value);
  return m;
}

std::vector<std::pair<ItemId, double>> PrMap::sorted() const {
  std::vector<std::pair<ItemId, double>> out(entries_.begin(), entries_.end());
  std::sort(out.begin(), out.end());
  return out;
}

SemiDistribution::SemiDistribution(PrMap entries) : entries_(std::move(entries)) {
  allocated_ = entries_.sum();
  if (allocated_ > 1.0 + kSumSlack) {
    throw std::invalid_argument("semi-distribution sums to " + std::to_string(allocated_));
  }
}

SemiDistribution::SemiDistribution(
    std::initializer_list<std::pair<const ItemId, double>> entries)
    : SemiDistribution(PrMap(entries)) {}

double SemiDistribution::min() const {
  if (entries_.empty()) return 0.0;
  double m = 1.0;
  for (const auto& [item, value] : entries_) m = std::min(m, value);
  return m;
}

std::vector<ItemId> SemiDistribution::support() const {
  std::vector<ItemId> ids;
  ids.reserve(entries_.size());
  for (const auto& [item, value] : entries_) ids.push_back(item);
  std::sort(ids.begin(), ids.end());
  return ids;
}

void validate(const FcConfig& cfg) {
  if (!(cfg.p_min >= 0.0 && cfg.p_min < 1.0)) {
    throw std::invalid_argument("p_min must be in [0,1)");
  }
  if (!(cfg.p_ns >= 0.0 && cfg.p_ns < 1.0)) {
    throw std::invalid_argument("p_ns must be in [0,1)");
  }
}

PrMap scale_drop(const PrMap& m, double alpha, double p_min) {
  if (!(alpha > 0.0)) throw std::invalid_argument("scale_drop: alpha must be positive");
  PrMap out;
  out.reserve(m.size());
  for (const auto& [item, value] : m) {
    double v = alpha * value;
    if (v >= p_min) out.set(item, std::min(v, 1.0));
  }
  return out;
}

SemiDistribution filter_cap(const PrMap& m, const FcConfig& cfg) {
  PrMap filtered = scale_drop(m, 1.0, cfg.p_min);
  double sum = filtered.sum();
  // Equality counts as already capped.
  if (sum <= 1.0 - cfg.p_ns + kSumSlack) return SemiDistribution(std::move(filtered));
  double alpha = (1.0 - cfg.p_ns) / sum;
  return SemiDistribution(scale_drop(filtered, alpha, cfg.p_min));
}

SemiDistribution augment(const SemiDistribution& p) {
  if (p.empty()) throw std::invalid_argument("augment: empty semi-distribution");
  PrMap out = p.map();
  double u = p.unallocated();
  if (u > kSumSlack) out.set(kUnallocatedItem, u);
  return SemiDistribution(std::move(out));
}

double entropy(const SemiDistribution& p) {
  if (p.empty()) throw std::invalid_argument("entropy: empty semi-distribution");
  double h = 0.0;
  for (const auto& [item, value] : p) h -= value * std::log(value);
  return h;
}

double kl(const SemiDistribution& p, const SemiDistribution& q) {
  double d = 0.0;
  for (const auto& [item, value] : p) {
    double qv = q.get(item);
    if (qv == 0.0) return kInfinity;
    d += value * std::log(value / qv);
  }
  return d;
}

double kl_bounded(const SemiDistribution& p, const SemiDistribution& q, double p_ns) {
  double d = 0.0;
  for (const auto& [item, value] : p) {
    double qv = std::max(q.get(item), p_ns);
    if (qv == 0.0) return kInfinity;
    d += value * std::log(value / qv);
  }
  return d;
}

double kl_ns(const SemiDistribution& p, const PrMap& q, const FcConfig& cfg) {
  SemiDistribution capped = filter_cap(q, cfg);
  SemiDistribution aq = capped.empty() ? SemiDistribution{{kUnallocatedItem, 1.0}}
                                       : augment(capped);
  return kl_bounded(augment(p), aq, cfg.p_ns);
}

namespace {

double distortion_gap(double p0, double p_ns) {
  return p0 * std::pow(1.0 - p0, (1.0 - p0) / p0) - p_ns;
}

}  // namespace

double distortion_threshold(double p_ns) {
  if (!(p_ns > 0.0 && p_ns < 0.5)) {
    throw std::invalid_argument("distortion_threshold: p_ns must be in (0, 0.5)");
  }
  // The left side reaches 0.25 at p0 = 0.5, so larger p_ns need a wider bracket.
  double lo = p_ns;
  double hi = distortion_gap(0.5, p_ns) >= 0.0 ? 0.5 : 1.0 - 1e-12;
  while (hi - lo > 1e-10) {
    double mid = 0.5 * (lo + hi);
    if (distortion_gap(mid, p_ns) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void write_sd_csv(std::ostream& out, const SemiDistribution& p) {
  out << "item_id,prob\n";
  for (const auto& [item, value] : p.map().sorted()) {
    out << item << ',' << format_double(value) << '\n';
  }
}

SemiDistribution read_sd_csv(std::istream& in) {
  PrMap m;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line.rfind("item_id", 0) == 0) continue;
    }
    auto fields = split_csv_line(line);
    if (fields.size() != 2) throw std::runtime_error("bad SD row: " + line);
    m.set(std::stoull(fields[0]), std::stod(fields[1]));
  }
  return SemiDistribution(std::move(m));
}

}  // namespace sparsema
