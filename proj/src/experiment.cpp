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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "sparsema/csv.hpp"
#include "sparsema/harness.hpp"

namespace sparsema {
namespace {

// Runs fn(0..n-1) on a small pool. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct SequenceOutput {
  std::vector<SequenceRow> rows;
  std::vector<TraceRow> traces;
  std::vector<RateTraceRow> rate_traces;
};

bool is_single(ExperimentKind kind) {
  return kind == ExperimentKind::kStationarySingle || kind == ExperimentKind::kNonstatSingle;
}

SequenceOutput run_sequence(const ExperimentSpec& spec, const EvalConfig& eval, std::size_t seq) {
  SequenceOutput out;
  GeneratedStream s = generate_stream(spec, seq);
  out.rows.push_back({seq, "optimal", "", "optimal_logloss",
                      optimal_logloss(s.observations, s.schedule)});
  bool trace = spec.traces && seq == 0;
  for (const auto& entry : spec.roster) {
    auto pred = make_predictor(entry, spec.defaults);
    StepObserver observer;
    if (trace) {
      bool single = is_single(spec.kind);
      observer = [&](std::uint64_t t, ItemId o, const Predictor& p, const PrMap& raw) {
        ItemId item = single ? eval.target : o;
        out.traces.push_back(
            {entry.kind, entry.param, t, item, raw.get(item), s.schedule.at(t).get(item)});
        if (auto* dyal = dynamic_cast<const DyalPredictor*>(&p)) {
          out.rate_traces.push_back({entry.kind, entry.param,
                                     {t, dyal->max_rate(), dyal->median_rate(),
                                      dyal->out_degree()}});
        }
      };
    }
    SequenceMetrics m = run_prequential(*pred, s.observations, eval, &s.schedule, observer);
    out.rows.push_back({seq, entry.kind, entry.param, "avg_logloss_ns", m.avg_logloss_ns});
    out.rows.push_back({seq, entry.kind, entry.param, "quad_loss", m.quad_loss});
    for (const auto& [name, rate] : m.dev_rates) {
      out.rows.push_back({seq, entry.kind, entry.param, name, rate});
    }
  }
  return out;
}

void require_roster(const ExperimentSpec& spec) {
  if (spec.roster.empty()) throw ConfigError("experiment needs a non-empty roster");
}

}  // namespace

GeneratedStream generate_stream(const ExperimentSpec& spec, std::size_t seq) {
  std::uint64_t seed = derive_seed(spec.seed, seq);
  switch (spec.kind) {
    case ExperimentKind::kStationarySingle: {
      Rng rng(seed);
      return gen_binary_stationary(spec.tp, spec.length, rng);
    }
    case ExperimentKind::kNonstatSingle: {
      Rng rng(seed);
      return gen_single_nonstationary(spec.single_mode, spec.gen, spec.length, rng,
                                      spec.start_high);
    }
    default: {
      GenConfig g = spec.gen;
      g.seed = seed;
      return SequenceGenerator(g).gen_sequence();
    }
  }
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kStationarySingle:
      return "stationary-single";
    case ExperimentKind::kNonstatSingle:
      return "nonstat-single";
    case ExperimentKind::kMultiItem:
      return "multi-item";
    case ExperimentKind::kRealFile:
      return "real-file";
    case ExperimentKind::kSelfConcat:
      return "self-concat";
    case ExperimentKind::kPlainCounting:
      return "plain-counting";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (auto kind : {ExperimentKind::kStationarySingle, ExperimentKind::kNonstatSingle,
                    ExperimentKind::kMultiItem, ExperimentKind::kRealFile,
                    ExperimentKind::kSelfConcat, ExperimentKind::kPlainCounting}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  ExperimentResult result;
  EvalConfig eval = spec.eval;
  validate(eval.fc);
  if (eval.dev_modes.empty()) {
    if (is_single(spec.kind)) {
      eval.dev_modes = {DevMode::kSingle};
    } else {
      eval.dev_modes = {DevMode::kObs, DevMode::kAny};
    }
  }
  switch (spec.kind) {
    case ExperimentKind::kPlainCounting: {
      for (double d : eval.dev_thresholds) {
        result.rows.push_back(
            {0, "plain_counting", std::to_string(spec.n_p), "dev_count_d" + format_double(d),
             plain_counting_deviation(spec.tp, spec.n_p, d, spec.trials, spec.seed)});
      }
      break;
    }
    case ExperimentKind::kStationarySingle:
    case ExperimentKind::kNonstatSingle:
    case ExperimentKind::kMultiItem: {
      require_roster(spec);
      if (spec.kind == ExperimentKind::kMultiItem) validate(spec.gen);
      std::vector<SequenceOutput> outputs(spec.trials);
      parallel_for(spec.trials, spec.threads,
                   [&](std::size_t i) { outputs[i] = run_sequence(spec, eval, i); });
      for (auto& o : outputs) {
        result.rows.insert(result.rows.end(), o.rows.begin(), o.rows.end());
        result.traces.insert(result.traces.end(), o.traces.begin(), o.traces.end());
        result.rate_traces.insert(result.rate_traces.end(), o.rate_traces.begin(),
                                  o.rate_traces.end());
      }
      result.sign_tests = pairwise_sign_tests(result.rows, spec.roster, "avg_logloss_ns");
      break;
    }
    case ExperimentKind::kRealFile: {
      require_roster(spec);
      if (spec.input.empty()) throw ConfigError("real-file experiment needs an input file");
      Ingested data = ingest(spec.input, spec.line_mode);
      std::vector<ItemId> flat;
      for (const auto& seg : data.segments) flat.insert(flat.end(), seg.begin(), seg.end());
      std::vector<SequenceOutput> outputs(spec.roster.size());
      parallel_for(spec.roster.size(), spec.threads, [&](std::size_t i) {
        const auto& entry = spec.roster[i];
        if (spec.conditional) {
          ConditionalResult c = run_conditional(data.segments, entry, spec.defaults, eval);
          outputs[i].rows.push_back({0, entry.kind, entry.param, "conditional_logloss",
                                     c.pooled_logloss});
          for (const auto& [events, loss] : c.snapshots) {
            outputs[i].rows.push_back({0, entry.kind, entry.param,
                                       "conditional_logloss@" + std::to_string(events), loss});
          }
        } else {
          auto pred = make_predictor(entry, spec.defaults);
          StepObserver observer;
          if (spec.traces && entry.kind == "dyal") {
            observer = [&](std::uint64_t t, ItemId, const Predictor& p, const PrMap&) {
              const auto& dyal = dynamic_cast<const DyalPredictor&>(p);
              outputs[i].rate_traces.push_back(
                  {entry.kind, entry.param,
                   {t, dyal.max_rate(), dyal.median_rate(), dyal.out_degree()}});
            };
          }
          SequenceMetrics m = run_prequential(*pred, flat, eval, nullptr, observer);
          outputs[i].rows.push_back({0, entry.kind, entry.param, "avg_logloss_ns",
                                     m.avg_logloss_ns});
          outputs[i].rows.push_back({0, entry.kind, entry.param, "quad_loss", m.quad_loss});
        }
      });
      for (auto& o : outputs) {
        result.rows.insert(result.rows.end(), o.rows.begin(), o.rows.end());
        result.rate_traces.insert(result.rate_traces.end(), o.rate_traces.begin(),
                                  o.rate_traces.end());
      }
      result.sign_tests = pairwise_sign_tests(
          result.rows, spec.roster, spec.conditional ? "conditional_logloss" : "avg_logloss_ns");
      break;
    }
    case ExperimentKind::kSelfConcat: {
      require_roster(spec);
      std::vector<ItemId> obs;
      if (!spec.input.empty()) {
        obs = ingest_sequence(spec.input);
      } else {
        obs = generate_stream(spec, 0).observations;
      }
      PredictorSpec traced{"dyal", format_double(DyalConfig{}.beta_min)};
      for (const auto& entry : spec.roster) {
        if (entry.kind == "dyal") {
          traced = entry;
          break;
        }
      }
      SelfConcatResult r =
          run_self_concat(obs, spec.concat_k, spec.roster, traced, spec.defaults, eval);
      for (const auto& [entry, losses] : r.pass_losses) {
        for (std::size_t p = 0; p < losses.size(); ++p) {
          result.rows.push_back({0, entry.kind, entry.param,
                                 "pass" + std::to_string(p + 1) + "_logloss", losses[p]});
        }
      }
      for (std::size_t p = 0; p < r.spikes_per_pass.size(); ++p) {
        result.rows.push_back({0, traced.kind, traced.param,
                               "pass" + std::to_string(p + 1) + "_rate_spikes",
                               static_cast<double>(r.spikes_per_pass[p])});
      }
      for (const auto& step : r.steps) {
        result.rate_traces.push_back({traced.kind, traced.param, step});
      }
      break;
    }
  }
  result.aggregates = aggregate(result.rows);
  return result;
}

std::vector<AggregateRow> aggregate(const std::vector<SequenceRow>& rows) {
  std::vector<AggregateRow> out;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> index;
  std::vector<std::vector<double>> values;
  for (const auto& r : rows) {
    auto key = std::make_tuple(r.method, r.param, r.metric);
    auto [it, inserted] = index.emplace(key, out.size());
    if (inserted) {
      out.push_back({r.method, r.param, r.metric, 0.0, 0.0, 0});
      values.emplace_back();
    }
    values[it->second].push_back(r.value);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& v = values[i];
    double sum = 0.0;
    for (double x : v) sum += x;
    double mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    out[i].mean = mean;
    out[i].std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    out[i].n = v.size();
  }
  return out;
}

std::vector<SignTestRow> pairwise_sign_tests(const std::vector<SequenceRow>& rows,
                                             const std::vector<PredictorSpec>& roster,
                                             const std::string& metric) {
  std::vector<std::map<std::size_t, double>> by_seq(roster.size());
  for (const auto& r : rows) {
    if (r.metric != metric) continue;
    for (std::size_t i = 0; i < roster.size(); ++i) {
      if (roster[i].kind == r.method && roster[i].param == r.param) by_seq[i][r.seq_id] = r.value;
    }
  }
  std::vector<SignTestRow> out;
  for (std::size_t i = 0; i < roster.size(); ++i) {
    for (std::size_t j = i + 1; j < roster.size(); ++j) {
      std::vector<double> a, b;
      for (const auto& [seq, v] : by_seq[i]) {
        auto it = by_seq[j].find(seq);
        if (it == by_seq[j].end()) continue;
        a.push_back(v);
        b.push_back(it->second);
      }
      out.push_back({roster[i], roster[j], metric, sign_test(a, b)});
    }
  }
  return out;
}

namespace {

void write_schema_line(std::ostream& out, const char* schema) {
  out << "# sparsema " << schema << " v" << kCsvSchemaVersion << '\n';
}

}  // namespace

void write_sequence_csv(std::ostream& out, const std::vector<SequenceRow>& rows) {
  write_schema_line(out, "per_sequence");
  out << "seq_id,method,param,metric,value\n";
  for (const auto& r : rows) {
    out << r.seq_id << ',' << r.method << ',' << r.param << ',' << r.metric << ','
        << format_double(r.value) << '\n';
  }
}

std::vector<SequenceRow> read_sequence_csv(std::istream& in) {
  std::vector<SequenceRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("seq_id,", 0) == 0) continue;
    auto f = split_csv_line(line);
    if (f.size() != 5) throw std::runtime_error("bad per-sequence row: " + line);
    rows.push_back({std::stoul(f[0]), f[1], f[2], f[3], std::stod(f[4])});
  }
  return rows;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  write_schema_line(out, "aggregate");
  out << "method,param,metric,mean,std,n\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.param << ',' << r.metric << ',' << format_double(r.mean) << ','
        << format_double(r.std) << ',' << r.n << '\n';
  }
}

void write_sign_test_csv(std::ostream& out, const std::vector<SignTestRow>& rows) {
  write_schema_line(out, "sign_tests");
  out << "method_a,param_a,method_b,param_b,metric,wins_a,wins_b,ties,p_value\n";
  for (const auto& r : rows) {
    out << r.a.kind << ',' << r.a.param << ',' << r.b.kind << ',' << r.b.param << ','
        << r.metric << ',' << r.result.wins_a << ',' << r.result.wins_b << ',' << r.result.ties
        << ',' << format_double(r.result.p_value) << '\n';
  }
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  write_schema_line(out, "estimate_trace");
  out << "method,param,t,item_id,estimate,true_pr\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.param << ',' << r.t << ',' << r.item << ','
        << format_double(r.estimate) << ',' << format_double(r.true_pr) << '\n';
  }
}

void write_rate_trace_csv(std::ostream& out, const std::vector<RateTraceRow>& rows) {
  write_schema_line(out, "rate_trace");
  out << "method,param,t,max_rate,median_rate,out_degree\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.param << ',' << r.step.t << ',' << format_double(r.step.max_rate)
        << ',' << format_double(r.step.median_rate) << ',' << r.step.out_degree << '\n';
  }
}

void write_results(const ExperimentSpec& spec, const ExperimentResult& result) {
  if (spec.out_dir.empty()) throw ConfigError("no output directory given");
  std::filesystem::create_directories(spec.out_dir);
  auto open = [&](const char* name) {
    std::ofstream f(spec.out_dir / name);
    if (!f) throw std::runtime_error("cannot write " + (spec.out_dir / name).string());
    return f;
  };
  {
    auto f = open("per_sequence.csv");
    write_sequence_csv(f, result.rows);
  }
  {
    auto f = open("aggregate.csv");
    write_aggregate_csv(f, result.aggregates);
  }
  {
    auto f = open("sign_tests.csv");
    write_sign_test_csv(f, result.sign_tests);
  }
  if (!result.traces.empty()) {
    auto f = open("trace_estimates.csv");
    write_trace_csv(f, result.traces);
  }
  if (!result.rate_traces.empty()) {
    auto f = open("trace_rates.csv");
    write_rate_trace_csv(f, result.rate_traces);
  }
}

}  // namespace sparsema
