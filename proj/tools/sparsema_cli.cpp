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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sparsema/csv.hpp"
#include "sparsema/dyal.hpp"
#include "sparsema/harness.hpp"

namespace fs = std::filesystem;
using namespace sparsema;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

// Settings shared by subcommands that build an ExperimentSpec.
struct SpecOptions {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::string> kind;
  std::optional<std::string> roster;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> threads;
  std::optional<std::uint64_t> c_ns;
  std::optional<std::uint64_t> referee_window;
  std::optional<std::string> input;
  std::string out;
};

void add_spec_options(CLI::App* cmd, SpecOptions& o, bool with_out) {
  cmd->add_option("-c,--config", o.config, "key=value config file");
  cmd->add_option("-s,--set", o.sets, "override one setting, key=value (repeatable)");
  cmd->add_option("--kind", o.kind, "experiment kind");
  cmd->add_option("--roster", o.roster, "comma separated kind:param entries");
  cmd->add_option("--trials", o.trials, "number of sequences");
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--threads", o.threads, "worker threads, 0 for all cores");
  cmd->add_option("--c-ns", o.c_ns, "referee noise threshold");
  cmd->add_option("--referee-window", o.referee_window, "referee window, 0 for unbounded");
  cmd->add_option("--input", o.input, "input file for real-file and self-concat runs");
  if (with_out) cmd->add_option("-o,--out", o.out, "output directory")->required();
}

ExperimentSpec build_spec(const SpecOptions& o) {
  ExperimentSpec spec;
  std::vector<std::pair<std::string, std::string>> kv;
  if (!o.config.empty()) kv = read_config_file(o.config);
  for (const auto& s : o.sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.kind) kv.emplace_back("kind", *o.kind);
  if (o.roster) kv.emplace_back("roster", *o.roster);
  if (o.trials) kv.emplace_back("trials", std::to_string(*o.trials));
  if (o.seed) kv.emplace_back("seed", std::to_string(*o.seed));
  if (o.threads) kv.emplace_back("threads", std::to_string(*o.threads));
  if (o.c_ns) kv.emplace_back("c_ns", std::to_string(*o.c_ns));
  if (o.referee_window) kv.emplace_back("referee_window", std::to_string(*o.referee_window));
  if (o.input) kv.emplace_back("input", *o.input);
  for (const auto& [k, v] : kv) apply_setting(spec, k, v);
  if (!o.out.empty()) spec.out_dir = o.out;
  return spec;
}

void print_aggregates(const ExperimentResult& r) {
  for (const auto& a : r.aggregates) {
    std::printf("%-18s %-24s %s +- %s (n=%zu)\n", (a.method + ":" + a.param).c_str(),
                a.metric.c_str(), format_double(a.mean).c_str(), format_double(a.std).c_str(),
                a.n);
  }
}

// ---------------------------------------------------------------------------

int cmd_gen(const SpecOptions& o) {
  ExperimentSpec spec = build_spec(o);
  if (spec.kind != ExperimentKind::kStationarySingle &&
      spec.kind != ExperimentKind::kNonstatSingle && spec.kind != ExperimentKind::kMultiItem) {
    throw ConfigError("gen supports stationary-single, nonstat-single and multi-item");
  }
  fs::create_directories(spec.out_dir);
  for (std::size_t i = 0; i < spec.trials; ++i) {
    GeneratedStream s = generate_stream(spec, i);
    std::string stem = "seq" + std::to_string(i);
    write_stream(spec.out_dir / (stem + ".items.txt"), spec.out_dir / (stem + ".schedule.csv"), s);
  }
  std::printf("wrote %zu streams to %s\n", spec.trials, spec.out_dir.string().c_str());
  return 0;
}

int cmd_run(const SpecOptions& o) {
  ExperimentSpec spec = build_spec(o);
  ExperimentResult r = run_experiment(spec);
  write_results(spec, r);
  print_aggregates(r);
  return 0;
}

int cmd_compare(const std::string& input, const std::string& metric,
                const std::vector<std::string>& pair, const std::string& out) {
  std::ifstream in(input);
  if (!in) throw std::runtime_error("cannot read " + input);
  std::vector<SequenceRow> rows = read_sequence_csv(in);
  std::vector<PredictorSpec> roster;
  std::set<std::string> seen;
  if (!pair.empty()) {
    if (pair.size() != 2) throw ConfigError("--pair expects exactly two entries");
    for (const auto& p : pair) {
      auto colon = p.find(':');
      if (colon == std::string::npos) throw ConfigError("invalid pair entry '" + p + "'");
      roster.push_back({p.substr(0, colon), p.substr(colon + 1)});
    }
  } else {
    for (const auto& r : rows) {
      if (r.method == "optimal") continue;
      if (seen.insert(r.method + ":" + r.param).second) roster.push_back({r.method, r.param});
    }
  }
  bool known = std::any_of(rows.begin(), rows.end(),
                           [&](const SequenceRow& r) { return r.metric == metric; });
  if (!known) throw ConfigError("metric '" + metric + "' not found in " + input);
  std::vector<SignTestRow> tests = pairwise_sign_tests(rows, roster, metric);
  if (tests.empty()) throw ConfigError("no comparable rows for metric '" + metric + "'");
  if (out.empty()) {
    write_sign_test_csv(std::cout, tests);
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    write_sign_test_csv(f, tests);
  }
  return 0;
}

int cmd_trace(const SpecOptions& o, const std::string& snapshot_dir, std::uint64_t every,
              std::size_t seq) {
  ExperimentSpec spec = build_spec(o);
  if (spec.roster.empty()) throw ConfigError("trace needs a non-empty roster");
  bool single = spec.kind == ExperimentKind::kStationarySingle ||
                spec.kind == ExperimentKind::kNonstatSingle;
  GeneratedStream s;
  bool has_truth = true;
  if (spec.kind == ExperimentKind::kRealFile || spec.kind == ExperimentKind::kSelfConcat) {
    if (spec.input.empty()) throw ConfigError("trace on a file needs input=<path>");
    s.observations = ingest_sequence(spec.input);
    has_truth = false;
  } else {
    s = generate_stream(spec, seq);
  }
  EvalConfig eval = spec.eval;
  if (eval.dev_modes.empty()) {
    eval.dev_modes = single ? std::vector<DevMode>{DevMode::kSingle}
                            : std::vector<DevMode>{DevMode::kObs, DevMode::kAny};
  }
  std::vector<TraceRow> traces;
  std::vector<RateTraceRow> rates;
  for (const auto& entry : spec.roster) {
    auto pred = make_predictor(entry, spec.defaults);
    fs::path snap_base;
    if (!snapshot_dir.empty()) snap_base = fs::path(snapshot_dir) / (entry.kind + "_" + entry.param);
    StepObserver observer = [&](std::uint64_t t, ItemId o, const Predictor& p, const PrMap& raw) {
      ItemId item = single ? eval.target : o;
      double truth = has_truth ? s.schedule.at(t).get(item) : 0.0;
      traces.push_back({entry.kind, entry.param, t, item, raw.get(item), truth});
      if (auto* dyal = dynamic_cast<const DyalPredictor*>(&p)) {
        rates.push_back(
            {entry.kind, entry.param, {t, dyal->max_rate(), dyal->median_rate(), dyal->out_degree()}});
      }
      if (!snap_base.empty() && every != 0 && (t - 1) % every == 0 && t > 1) {
        p.write_snapshot(snap_base / ("t" + std::to_string(t - 1)));
      }
    };
    SequenceMetrics m =
        run_prequential(*pred, s.observations, eval, has_truth ? &s.schedule : nullptr, observer);
    if (!snap_base.empty()) pred->write_snapshot(snap_base / ("t" + std::to_string(m.steps)));
    std::printf("%-18s avg_logloss_ns %s\n", entry.label().c_str(),
                format_double(m.avg_logloss_ns).c_str());
  }
  fs::create_directories(spec.out_dir);
  {
    std::ofstream f(spec.out_dir / "trace_estimates.csv");
    write_trace_csv(f, traces);
  }
  if (!rates.empty()) {
    std::ofstream f(spec.out_dir / "trace_rates.csv");
    write_rate_trace_csv(f, rates);
  }
  return 0;
}

int cmd_ingest_check(const std::string& input, const std::string& mode, std::uint64_t c_ns,
                     std::uint64_t window) {
  Ingested data = ingest(input, parse_line_mode(mode));
  std::size_t total = 0;
  std::map<ItemId, std::size_t> counts;
  for (const auto& seg : data.segments) {
    total += seg.size();
    for (ItemId id : seg) ++counts[id];
  }
  std::size_t singletons = 0;
  for (const auto& [id, c] : counts) singletons += c == 1;
  Referee referee(RefereeConfig{c_ns, window});
  std::size_t marked = 0;
  for (const auto& seg : data.segments) {
    for (ItemId id : seg) marked += referee.is_ns(id);
  }
  std::printf("key,value\n");
  std::printf("input,%s\n", input.c_str());
  std::printf("segments,%zu\n", data.segments.size());
  std::printf("tokens,%zu\n", total);
  std::printf("distinct,%zu\n", data.vocab.size());
  std::printf("singletons,%zu\n", singletons);
  std::printf("ns_marked,%zu\n", marked);
  std::printf("ns_fraction,%s\n",
              format_double(total ? static_cast<double>(marked) / total : 0.0).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparsema: sparse moving-average predictors and their evaluation"};
  app.require_subcommand(1);

  SpecOptions gen_opts, run_opts, trace_opts;
  auto* gen = app.add_subcommand("gen", "write synthetic streams and their schedules");
  add_spec_options(gen, gen_opts, true);

  auto* run = app.add_subcommand("run", "run an experiment and write result CSVs");
  add_spec_options(run, run_opts, true);

  std::string cmp_input, cmp_metric = "avg_logloss_ns", cmp_out;
  std::vector<std::string> cmp_pair;
  auto* compare = app.add_subcommand("compare", "paired sign tests over a per-sequence CSV");
  compare->add_option("input", cmp_input, "per_sequence.csv")->required();
  compare->add_option("--metric", cmp_metric, "metric to compare");
  compare->add_option("--pair", cmp_pair, "two kind:param entries")->expected(2);
  compare->add_option("-o,--out", cmp_out, "write CSV here instead of stdout");

  std::string snapshot_dir;
  std::uint64_t snapshot_every = 1000;
  std::size_t trace_seq = 0;
  auto* trace = app.add_subcommand("trace", "per-step estimate and learning-rate traces");
  add_spec_options(trace, trace_opts, true);
  trace->add_option("--snapshot-dir", snapshot_dir, "write predictor state snapshots here");
  trace->add_option("--snapshot-every", snapshot_every, "steps between snapshots");
  trace->add_option("--sequence", trace_seq, "index of the generated sequence to trace");

  std::string ing_input, ing_mode = "flat";
  std::uint64_t ing_c_ns = 2, ing_window = 0;
  auto* ingest_check = app.add_subcommand("ingest-check", "summarize an input file");
  ingest_check->add_option("input", ing_input, "token file")->required();
  ingest_check->add_option("--line-mode", ing_mode, "flat, tokens or chars");
  ingest_check->add_option("--c-ns", ing_c_ns, "referee noise threshold");
  ingest_check->add_option("--referee-window", ing_window, "referee window, 0 for unbounded");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) return cmd_gen(gen_opts);
    if (*run) return cmd_run(run_opts);
    if (*compare) return cmd_compare(cmp_input, cmp_metric, cmp_pair, cmp_out);
    if (*trace) return cmd_trace(trace_opts, snapshot_dir, snapshot_every, trace_seq);
    if (*ingest_check) return cmd_ingest_check(ing_input, ing_mode, ing_c_ns, ing_window);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
