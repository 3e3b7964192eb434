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
#include <unordered_map>

#include "sparsema/box.hpp"
#include "sparsema/csv.hpp"
#include "sparsema/ema.hpp"
#include "sparsema/harness.hpp"
#include "sparsema/queues.hpp"

namespace sparsema {
namespace {

double parse_number(const std::string& entry, const std::string& text) {
  try {
    std::size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid roster entry '" + entry + "': parameter is not a number");
  }
}

std::size_t parse_count(const std::string& entry, const std::string& text, std::size_t lo) {
  double v = parse_number(entry, text);
  if (v != std::floor(v) || v < static_cast<double>(lo)) {
    throw ConfigError("invalid roster entry '" + entry + "': parameter must be an integer >= " +
                      std::to_string(lo));
  }
  return static_cast<std::size_t>(v);
}

double parse_rate(const std::string& entry, const std::string& text, bool allow_zero) {
  double v = parse_number(entry, text);
  if (!(v <= 1.0 && (allow_zero ? v >= 0.0 : v > 0.0))) {
    throw ConfigError("invalid roster entry '" + entry + "': rate must be in " +
                      (allow_zero ? "[0,1]" : "(0,1]"));
  }
  return v;
}

}  // namespace

PredictorSpec parse_predictor_spec(const std::string& entry) {
  auto colon = entry.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == entry.size()) {
    throw ConfigError("invalid roster entry '" + entry + "': expected kind:param");
  }
  PredictorSpec spec{entry.substr(0, colon), entry.substr(colon + 1)};
  // Validate eagerly so errors name the entry before any work starts.
  make_predictor(spec, PredictorDefaults{});
  return spec;
}

std::vector<PredictorSpec> parse_roster(const std::string& list) {
  std::vector<PredictorSpec> roster;
  for (auto entry : split_csv_line(list)) {
    auto b = entry.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    entry = entry.substr(b, entry.find_last_not_of(" \t") - b + 1);
    roster.push_back(parse_predictor_spec(entry));
  }
  return roster;
}

std::unique_ptr<Predictor> make_predictor(const PredictorSpec& spec,
                                          const PredictorDefaults& defaults) {
  const std::string entry = spec.label();
  if (spec.kind == "ema") {
    EmaConfig cfg;
    cfg.beta = parse_rate(entry, spec.param, false);
    cfg.drop_below = defaults.ema_drop_below;
    return std::make_unique<EmaPredictor>(cfg);
  }
  if (spec.kind == "harmonic") {
    EmaConfig cfg;
    cfg.beta = 1.0;
    cfg.harmonic = true;
    cfg.beta_min = parse_rate(entry, spec.param, true);
    cfg.drop_below = defaults.ema_drop_below;
    return std::make_unique<EmaPredictor>(cfg);
  }
  if (spec.kind == "queues") {
    QueuesConfig cfg;
    cfg.qcap = parse_count(entry, spec.param, 2);
    cfg.prune = defaults.prune;
    return std::make_unique<QueuesPredictor>(cfg);
  }
  if (spec.kind == "ts_queues") {
    TimestampQueuesConfig cfg;
    cfg.qcap = parse_count(entry, spec.param, 2);
    cfg.prune = defaults.prune;
    return std::make_unique<TimestampQueuesPredictor>(cfg);
  }
  if (spec.kind == "box") {
    return std::make_unique<BoxPredictor>(parse_count(entry, spec.param, 1));
  }
  if (spec.kind == "dyal") {
    DyalConfig cfg;
    cfg.beta_min = parse_rate(entry, spec.param, false);
    cfg.p_min = defaults.p_min;
    cfg.sig_thresh = defaults.sig_thresh;
    cfg.qcap = defaults.qcap;
    cfg.prune = defaults.prune;
    return std::make_unique<DyalPredictor>(cfg);
  }
  throw ConfigError("invalid roster entry '" + entry + "': unknown predictor kind '" +
                    spec.kind + "'");
}

std::string dev_metric_name(DevMode mode, double d) {
  return "dev_" + to_string(mode) + "_d" + format_double(d);
}

SequenceMetrics run_prequential(Predictor& pred, const std::vector<ItemId>& obs,
                                const EvalConfig& cfg, const GroundTruthSchedule* schedule,
                                const StepObserver& observer) {
  SequenceMetrics m;
  m.steps = obs.size();
  Referee referee(cfg.referee);
  std::vector<DeviationConfig> devs;
  if (schedule != nullptr) {
    for (DevMode mode : cfg.dev_modes) {
      for (double d : cfg.dev_thresholds) devs.push_back({d, mode, cfg.fc.p_min, cfg.target});
    }
  }
  std::vector<std::uint64_t> dev_counts(devs.size(), 0);
  double loss = 0.0;
  double quad = 0.0;
  for (std::size_t t = 0; t < obs.size(); ++t) {
    ItemId o = obs[t];
    PrMap raw = pred.predict();
    SemiDistribution capped = filter_cap(raw, cfg.fc);
    loss += logloss_rule_ns_capped(o, capped, referee.is_ns(o), cfg.fc);
    quad += quad_rule_capped(capped, o);
    if (!devs.empty()) {
      const SemiDistribution& p = schedule->at(t + 1);
      const PrMap& q = cfg.dev_on_capped ? capped.map() : raw;
      for (std::size_t j = 0; j < devs.size(); ++j) dev_counts[j] += multidev(o, q, p, devs[j]);
    }
    if (observer) observer(t + 1, o, pred, raw);
    pred.update(o);
  }
  if (!obs.empty()) {
    double n = static_cast<double>(obs.size());
    m.avg_logloss_ns = loss / n;
    m.quad_loss = quad / n;
    for (std::size_t j = 0; j < devs.size(); ++j) {
      m.dev_rates.emplace_back(dev_metric_name(devs[j].mode, devs[j].d),
                               static_cast<double>(dev_counts[j]) / n);
    }
  }
  return m;
}

ConditionalResult run_conditional(const std::vector<std::vector<ItemId>>& segments,
                                  const PredictorSpec& spec, const PredictorDefaults& defaults,
                                  const EvalConfig& cfg, std::uint64_t snapshot_every) {
  struct Context {
    std::unique_ptr<Predictor> pred;
    Referee referee;
  };
  std::unordered_map<ItemId, Context> contexts;
  ConditionalResult r;
  double total = 0.0;
  for (const auto& seg : segments) {
    for (std::size_t j = 0; j + 1 < seg.size(); ++j) {
      auto it = contexts.find(seg[j]);
      if (it == contexts.end()) {
        it = contexts.emplace(seg[j], Context{make_predictor(spec, defaults), Referee(cfg.referee)})
                 .first;
      }
      Context& c = it->second;
      ItemId b = seg[j + 1];
      SemiDistribution capped = filter_cap(c.pred->predict(), cfg.fc);
      total += logloss_rule_ns_capped(b, capped, c.referee.is_ns(b), cfg.fc);
      c.pred->update(b);
      ++r.events;
      if (snapshot_every != 0 && r.events % snapshot_every == 0) {
        r.snapshots.emplace_back(r.events, total / static_cast<double>(r.events));
      }
    }
  }
  r.contexts = contexts.size();
  if (r.events > 0) r.pooled_logloss = total / static_cast<double>(r.events);
  return r;
}

SelfConcatResult run_self_concat(const std::vector<ItemId>& obs, std::size_t k,
                                 const std::vector<PredictorSpec>& roster,
                                 const PredictorSpec& dyal_spec,
                                 const PredictorDefaults& defaults, const EvalConfig& cfg) {
  if (k == 0) throw ConfigError("self-concatenation count must be at least 1");
  if (dyal_spec.kind != "dyal") throw ConfigError("rate trace needs a dyal entry");
  SelfConcatResult r;
  r.pass_length = obs.size();
  auto traced = make_predictor(dyal_spec, defaults);
  auto& dyal = dynamic_cast<DyalPredictor&>(*traced);
  struct Member {
    std::unique_ptr<Predictor> pred;
    Referee referee;
  };
  std::vector<Member> members;
  for (const auto& spec : roster) {
    members.push_back({make_predictor(spec, defaults), Referee(cfg.referee)});
    r.pass_losses.emplace_back(spec, std::vector<double>());
  }
  r.steps.reserve(obs.size() * k);
  double prev_max = 0.0;
  std::uint64_t t = 0;
  for (std::size_t pass = 0; pass < k; ++pass) {
    std::vector<double> loss(members.size(), 0.0);
    std::size_t spikes = 0;
    for (ItemId o : obs) {
      for (std::size_t m = 0; m < members.size(); ++m) {
        SemiDistribution capped = filter_cap(members[m].pred->predict(), cfg.fc);
        loss[m] += logloss_rule_ns_capped(o, capped, members[m].referee.is_ns(o), cfg.fc);
        members[m].pred->update(o);
      }
      dyal.update(o);
      RateStep step{++t, dyal.max_rate(), dyal.median_rate(), dyal.out_degree()};
      if (step.max_rate > prev_max) ++spikes;
      prev_max = step.max_rate;
      r.steps.push_back(step);
    }
    r.spikes_per_pass.push_back(spikes);
    for (std::size_t m = 0; m < members.size(); ++m) {
      r.pass_losses[m].second.push_back(obs.empty() ? 0.0
                                                    : loss[m] / static_cast<double>(obs.size()));
    }
  }
  return r;
}

double plain_counting_deviation(double tp, std::uint64_t n_p, double d, std::size_t trials,
                                std::uint64_t seed) {
  if (trials == 0) return 0.0;
  Rng rng(seed);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    std::uint64_t t = 0;
    for (std::uint64_t j = 0; j < n_p; ++j) t += rng.geometric(tp);
    hits += deviates(static_cast<double>(n_p) / static_cast<double>(t), tp, d);
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace sparsema
