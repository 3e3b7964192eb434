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
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sparsema/dyal.hpp"
#include "sparsema/eval.hpp"
#include "sparsema/predictor.hpp"
#include "sparsema/synth.hpp"

namespace sparsema {

// Bad user-supplied settings. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Ingestion

enum class LineMode {
  kFlat,    // one token per line, the whole file is one sequence
  kTokens,  // each line is a sequence of whitespace separated tokens
  kChars,   // each line is a sequence of characters
};

LineMode parse_line_mode(const std::string& name);

struct Ingested {
  std::vector<std::vector<ItemId>> segments;
  std::vector<std::string> vocab;  // id -> token
};

// Tokens are interned to ids 0, 1, ... in first-seen order.
// Empty lines are skipped. Throws std::runtime_error naming the path.
std::vector<ItemId> ingest_sequence(const std::filesystem::path& path);
Ingested ingest(const std::filesystem::path& path, LineMode mode);

// ---------------------------------------------------------------------------
// Predictor roster

struct PredictorDefaults {
  double p_min = 0.01;
  double sig_thresh = 5.0;
  std::size_t qcap = 3;
  PruneConfig prune;
  double ema_drop_below = 1e-4;
};

/**
 * @brief One roster entry, written `kind:param`.
 *
 * Kinds: ema (static rate), harmonic (rate floor), queues (qcap),
 * ts_queues (qcap), box (window size), dyal (rate floor).
 */
struct PredictorSpec {
  std::string kind;
  std::string param;

  std::string label() const { return kind + ":" + param; }
  bool operator==(const PredictorSpec& o) const { return kind == o.kind && param == o.param; }
};

PredictorSpec parse_predictor_spec(const std::string& entry);
// Comma separated entries.
std::vector<PredictorSpec> parse_roster(const std::string& list);
std::unique_ptr<Predictor> make_predictor(const PredictorSpec& spec,
                                          const PredictorDefaults& defaults);

// ---------------------------------------------------------------------------
// Runs

struct EvalConfig {
  FcConfig fc;
  RefereeConfig referee;
  std::vector<double> dev_thresholds{1.5, 2.0};
  // Empty lets run_experiment pick: single for binary streams, obs and any
  // otherwise.
  std::vector<DevMode> dev_modes;
  // Score deviations on FC(q) rather than on the raw predictor output.
  bool dev_on_capped = false;
  ItemId target = 1;
};

struct SequenceMetrics {
  std::size_t steps = 0;
  double avg_logloss_ns = 0.0;
  double quad_loss = 0.0;
  // (metric name, rate), one per (mode, threshold) when a schedule is given.
  std::vector<std::pair<std::string, double>> dev_rates;
};

std::string dev_metric_name(DevMode mode, double d);

// Called once per step, after predict() and before update().
using StepObserver =
    std::function<void(std::uint64_t t, ItemId o, const Predictor& pred, const PrMap& raw)>;

SequenceMetrics run_prequential(Predictor& pred, const std::vector<ItemId>& obs,
                                const EvalConfig& cfg,
                                const GroundTruthSchedule* schedule = nullptr,
                                const StepObserver& observer = {});

struct ConditionalResult {
  std::uint64_t events = 0;
  std::size_t contexts = 0;
  double pooled_logloss = 0.0;
  // (events so far, pooled average so far) every `snapshot_every` events.
  std::vector<std::pair<std::uint64_t, double>> snapshots;
};

// One predictor and one referee per context item. Pairs never cross a
// segment boundary.
ConditionalResult run_conditional(const std::vector<std::vector<ItemId>>& segments,
                                  const PredictorSpec& spec, const PredictorDefaults& defaults,
                                  const EvalConfig& cfg, std::uint64_t snapshot_every = 1000);

struct RateStep {
  std::uint64_t t = 0;
  double max_rate = 0.0;
  double median_rate = 0.0;
  std::size_t out_degree = 0;
};

struct SelfConcatResult {
  std::size_t pass_length = 0;
  std::vector<RateStep> steps;
  // Steps where max_rate rose, counted per pass.
  std::vector<std::size_t> spikes_per_pass;
  // Average bounded log-loss per pass, one vector per roster entry.
  std::vector<std::pair<PredictorSpec, std::vector<double>>> pass_losses;
};

// Runs obs repeated k times. The rate trace follows `dyal_spec`.
SelfConcatResult run_self_concat(const std::vector<ItemId>& obs, std::size_t k,
                                 const std::vector<PredictorSpec>& roster,
                                 const PredictorSpec& dyal_spec,
                                 const PredictorDefaults& defaults, const EvalConfig& cfg);

// Fraction of trials where the count estimate n_p / t, read when the n_p-th
// positive arrives, deviates from tp by more than d.
double plain_counting_deviation(double tp, std::uint64_t n_p, double d, std::size_t trials,
                                std::uint64_t seed);

// ---------------------------------------------------------------------------
// Experiments

enum class ExperimentKind {
  kStationarySingle,
  kNonstatSingle,
  kMultiItem,
  kRealFile,
  kSelfConcat,
  kPlainCounting,
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kMultiItem;
  std::vector<PredictorSpec> roster;
  PredictorDefaults defaults;
  EvalConfig eval;
  GenConfig gen;
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0 picks the hardware concurrency
  std::filesystem::path out_dir;
  bool traces = false;

  // single-item streams
  double tp = 0.1;
  std::size_t length = 10000;
  SingleMode single_mode = SingleMode::kOscillate;
  bool start_high = true;
  std::uint64_t n_p = 10;

  // file input
  std::filesystem::path input;
  LineMode line_mode = LineMode::kFlat;
  bool conditional = false;
  std::size_t concat_k = 10;
};

// Builds a spec from key=value settings, applied in order over defaults.
// Unknown keys and bad values raise ConfigError.
void apply_setting(ExperimentSpec& spec, const std::string& key, const std::string& value);
std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path);
// Names of every recognised key.
std::vector<std::string> config_keys();

struct SequenceRow {
  std::size_t seq_id = 0;
  std::string method;
  std::string param;
  std::string metric;
  double value = 0.0;
};

struct AggregateRow {
  std::string method;
  std::string param;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

struct SignTestRow {
  PredictorSpec a;
  PredictorSpec b;
  std::string metric;
  SignTestResult result;
};

struct TraceRow {
  std::string method;
  std::string param;
  std::uint64_t t = 0;
  ItemId item = 0;
  double estimate = 0.0;
  double true_pr = 0.0;
};

struct RateTraceRow {
  std::string method;
  std::string param;
  RateStep step;
};

struct ExperimentResult {
  std::vector<SequenceRow> rows;
  std::vector<AggregateRow> aggregates;
  std::vector<SignTestRow> sign_tests;
  std::vector<TraceRow> traces;
  std::vector<RateTraceRow> rate_traces;
};

// Stream `seq` of a synthetic experiment, seeded by derive_seed(spec.seed, seq).
GeneratedStream generate_stream(const ExperimentSpec& spec, std::size_t seq);

ExperimentResult run_experiment(const ExperimentSpec& spec);

std::vector<AggregateRow> aggregate(const std::vector<SequenceRow>& rows);
std::vector<SignTestRow> pairwise_sign_tests(const std::vector<SequenceRow>& rows,
                                             const std::vector<PredictorSpec>& roster,
                                             const std::string& metric);

// CSV writers. Each file starts with a `# sparsema <schema> v<version>` line.
inline constexpr int kCsvSchemaVersion = 1;
void write_sequence_csv(std::ostream& out, const std::vector<SequenceRow>& rows);
std::vector<SequenceRow> read_sequence_csv(std::istream& in);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
void write_sign_test_csv(std::ostream& out, const std::vector<SignTestRow>& rows);
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);
void write_rate_trace_csv(std::ostream& out, const std::vector<RateTraceRow>& rows);

// Writes per_sequence.csv, aggregate.csv, sign_tests.csv and the trace files
// present in the result into spec.out_dir.
void write_results(const ExperimentSpec& spec, const ExperimentResult& result);

}  // namespace sparsema
