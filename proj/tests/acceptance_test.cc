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

// Reproduction checks for the published results. Prints one PASS/FAIL line
// per criterion and exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sparsema/box.hpp"
#include "sparsema/dyal.hpp"
#include "sparsema/ema.hpp"
#include "sparsema/harness.hpp"
#include "sparsema/queues.hpp"

namespace sparsema {
namespace {

namespace fs = std::filesystem;

struct Check {
  std::string what;
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  std::function<std::vector<Check>()> run;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

Check near(const std::string& what, double got, double want, double tol, int digits = 4) {
  return {what, std::fabs(got - want) <= tol,
          fmt(got, digits) + " vs " + fmt(want, digits) + " +- " + fmt(tol, digits)};
}

Check at_most(const std::string& what, double got, double bound, int digits = 4) {
  return {what, got <= bound, fmt(got, digits) + " <= " + fmt(bound, digits)};
}

Check below(const std::string& what, double got, double bound, int digits = 4) {
  return {what, got < bound, fmt(got, digits) + " < " + fmt(bound, digits)};
}

Check holds(const std::string& what, bool ok, const std::string& detail) {
  return {what, ok, detail};
}

double mean_of(const ExperimentResult& r, const std::string& label, const std::string& metric) {
  for (const auto& a : r.aggregates) {
    if (a.method + ":" + a.param == label && a.metric == metric) return a.mean;
  }
  return std::nan("");
}

// ---------------------------------------------------------------------------

std::vector<Check> plain_counting() {
  double f = plain_counting_deviation(0.1, 10, 1.5, 5000, 2021);
  return {near("deviation fraction, tp=0.1 N_p=10 d=1.5, 5k sequences", f, 0.18, 0.03)};
}

std::vector<Check> stationary_single() {
  ExperimentSpec s;
  s.kind = ExperimentKind::kStationarySingle;
  s.roster = parse_roster("harmonic:0.001,queues:10");
  s.trials = 200;
  s.length = 10000;
  s.tp = 0.1;
  s.seed = 3;
  ExperimentResult r = run_experiment(s);
  return {near("harmonic(0.001) dev d=1.5", mean_of(r, "harmonic:0.001", "dev_single_d1.5"),
               0.006, 0.010),
          near("queues(10) dev d=2", mean_of(r, "queues:10", "dev_single_d2"), 0.026, 0.015)};
}

std::vector<Check> nonstationary_single() {
  ExperimentSpec s;
  s.kind = ExperimentKind::kNonstatSingle;
  s.roster = parse_roster("dyal:0.001,ema:0.001");
  s.trials = 100;
  s.length = 10000;
  s.single_mode = SingleMode::kOscillate;
  s.gen.o_min = 50;
  s.seed = 4;
  ExperimentResult r = run_experiment(s);
  double dyal = mean_of(r, "dyal:0.001", "dev_single_d1.5");
  double ema = mean_of(r, "ema:0.001", "dev_single_d1.5");
  return {near("dyal(0.001) dev d=1.5", dyal, 0.099, 0.105),
          below("dyal(0.001) below ema(0.001) (" + fmt(ema) + ")", dyal, ema)};
}

const ExperimentResult& multi_item_run() {
  static const ExperimentResult r = [] {
    ExperimentSpec s;
    s.kind = ExperimentKind::kMultiItem;
    s.roster = parse_roster(
        "queues:5,queues:10,ema:0.01,ema:0.001,harmonic:0.01,harmonic:0.001,dyal:0.01,"
        "dyal:0.001,box:100");
    s.trials = 50;
    s.gen.o_min = 50;
    s.seed = 5;
    return run_experiment(s);
  }();
  return r;
}

std::vector<Check> multi_item() {
  const ExperimentResult& r = multi_item_run();
  double opt = mean_of(r, "optimal:", "optimal_logloss");
  double dyal = mean_of(r, "dyal:0.01", "avg_logloss_ns");
  std::vector<Check> out = {near("optimal loss", opt, 1.028, 0.05),
                            near("dyal(0.01) avg loss", dyal, 1.05, 0.05)};
  for (const char* label :
       {"queues:5", "queues:10", "ema:0.01", "ema:0.001", "harmonic:0.01", "harmonic:0.001"}) {
    out.push_back(at_most(std::string("dyal(0.01) <= ") + label, dyal,
                          mean_of(r, label, "avg_logloss_ns")));
  }
  return out;
}

std::vector<Check> box_pairing() {
  const ExperimentResult& r = multi_item_run();
  for (const auto& t : r.sign_tests) {
    bool dyal_first = t.a.label() == "dyal:0.01" && t.b.label() == "box:100";
    bool dyal_second = t.b.label() == "dyal:0.01" && t.a.label() == "box:100";
    if (!dyal_first && !dyal_second) continue;
    std::size_t wins = dyal_first ? t.result.wins_a : t.result.wins_b;
    return {holds("dyal(0.01) wins vs box(100)", wins >= 45,
                  std::to_string(wins) + " of 50 >= 45"),
            below("sign-test p", t.result.p_value, 1e-6, 17)};
  }
  return {holds("dyal vs box sign test present", false, "missing")};
}

std::vector<Check> estimators() {
  std::vector<Check> out;
  {
    // k = 5 completed cells read from a live queue.
    Rng rng(61);
    const double tp = 0.1;
    const int trials = 100000;
    double sum = 0.0;
    for (int i = 0; i < trials; ++i) {
      Queue q(6);
      q.positive_update();
      while (q.size() < 6) {
        if (rng.bernoulli(tp)) q.positive_update();
        else q.negative_update();
      }
      sum += q.completed_cells_pr();
    }
    double mean = sum / trials;
    out.push_back(near("E[G_5] / tp", mean / tp, 1.0, 0.02));
  }
  for (double tp : {0.5, 0.1, 0.01}) {
    Rng rng(62);
    const int trials = 2000000;
    double sum = 0.0;
    for (int i = 0; i < trials; ++i) sum += 1.0 / static_cast<double>(rng.geometric(tp));
    double want = -tp * std::log(tp) / (1.0 - tp);
    out.push_back(near("E[1/C] / closed form, tp=" + fmt(tp, 2), sum / trials / want, 1.0, 0.01));
  }
  {
    Rng rng(63);
    const double tp = 0.001;
    const long trials = 20000000;
    double s1 = 0.0, s2 = 0.0;
    for (long i = 0; i < trials; ++i) {
      double x = 1.0 / static_cast<double>(rng.geometric(tp));
      s1 += x;
      s2 += x * x;
    }
    double m = s1 / trials;
    double var = s2 / trials - m * m;
    double limit = M_PI * M_PI / 6.0;
    out.push_back(near("Var(1/C)/tp / (pi^2/6), tp=0.001", var / tp / limit, 1.0, 0.05));
  }
  return out;
}

std::vector<Check> ema_convergence() {
  const double tp = 0.1, beta = 0.02;
  Rng rng(71);
  double total = 0.0;
  double max_step = 0.0;
  const int runs = 500;
  for (int r = 0; r < runs; ++r) {
    EmaPredictor ema = EmaPredictor::static_rate(beta);
    double prev = 0.0;
    std::uint64_t t = 0;
    bool visited = false;
    // Run past the first visit to also exercise the step cap near tp.
    for (; t < 4000 && !(visited && t >= 1000);) {
      ema.update(rng.bernoulli(tp) ? 1 : 0);
      ++t;
      double p = ema.estimate(1);
      max_step = std::max(max_step, std::fabs(p - prev));
      prev = p;
      if (!visited && std::fabs(p - tp) <= beta) {
        visited = true;
        total += static_cast<double>(t);
      }
    }
    if (!visited) total += 1e9;
  }
  return {at_most("mean first visit into tp+-beta, (0.1, 0.02)", total / runs, 1.0 / (beta * beta), 1),
          at_most("max |step|", max_step, beta + 1e-15, 6)};
}

std::vector<Check> exactness() {
  std::vector<Check> out;
  {
    Rng rng(81);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      EmaConfig cfg;
      cfg.beta = 1.0;
      cfg.harmonic = true;
      cfg.beta_min = 0.0;
      cfg.drop_below = 0.0;
      EmaPredictor ema(cfg);
      double tp = rng.uniform(0.01, 0.99);
      std::uint64_t ones = 0;
      for (std::uint64_t t = 1; t <= 10000; ++t) {
        ItemId o = rng.bernoulli(tp) ? 1 : 0;
        ones += o;
        ema.update(o);
        worst = std::max(worst, std::fabs(ema.estimate(1) - static_cast<double>(ones) / t));
      }
    }
    out.push_back({"harmonic ema == running average", worst <= 1e-12,
                   "max gap " + fmt(worst * 1e15, 2) + "e-15 (fp rounding)"});
  }
  {
    std::size_t mismatches = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      QueuesPredictor plain;
      TimestampQueuesPredictor stamped;
      Rng rng(derive_seed(82, seed));
      std::size_t alphabet = 2 + rng.below(40);
      for (int t = 0; t < 10000; ++t) {
        ItemId o = rng.bernoulli(0.2) ? 100000 + t : rng.below(alphabet);
        plain.update(o);
        stamped.update(o);
        if (!(plain.predict() == stamped.predict())) ++mismatches;
      }
    }
    out.push_back(holds("timestamp queues == plain queues", mismatches == 0,
                        std::to_string(mismatches) + " mismatched steps of 1e6"));
  }
  {
    Rng rng(83);
    std::size_t mismatches = 0;
    for (std::size_t k : {1, 2, 7, 100}) {
      BoxPredictor box(k);
      std::deque<ItemId> window;
      for (int t = 0; t < 5000; ++t) {
        ItemId o = rng.below(12);
        box.update(o);
        window.push_back(o);
        if (window.size() > k) window.pop_front();
        std::map<ItemId, double> counts;
        for (ItemId i : window) counts[i] += 1.0;
        PrMap q = box.predict();
        bool ok = q.size() == counts.size();
        for (auto [i, c] : counts) ok = ok && q.get(i) == c / static_cast<double>(window.size());
        mismatches += !ok;
      }
    }
    out.push_back(holds("box == window recount", mismatches == 0,
                        std::to_string(mismatches) + " mismatched steps"));
  }
  {
    Rng rng(84);
    std::size_t bad = 0;
    EmaPredictor ema = EmaPredictor::static_rate(0.05);
    DyalPredictor dyal;
    ItemId noise = kNoiseBase;
    for (int t = 0; t < 100000; ++t) {
      ItemId o = rng.bernoulli(0.15) ? noise++ : (t / 7000) * 3 + rng.below(5);
      ema.update(o);
      dyal.update(o);
      for (const PrMap* m : {&ema.weights(), &dyal.state().ema_map}) {
        bool ok = m->sum() <= 1.0 + kSumSlack;
        for (const auto& [i, v] : *m) ok = ok && v > 0.0 && v <= 1.0;
        bad += !ok;
      }
    }
    out.push_back(holds("SD invariant after ema/dyal updates", bad == 0,
                        std::to_string(bad) + " violations in 1e5 steps"));
  }
  {
    Rng rng(85);
    std::size_t bad = 0;
    for (int trial = 0; trial < 100000; ++trial) {
      FcConfig cfg{rng.uniform(0.001, 0.2), rng.uniform(0.001, 0.3)};
      PrMap q;
      std::size_t n = rng.below(12);
      for (std::size_t i = 0; i < n; ++i) q.set(i, rng.uniform01() * 0.5);
      double raw_kept = 0.0;
      for (const auto& [i, v] : q) raw_kept += v >= cfg.p_min ? v : 0.0;
      SemiDistribution c = filter_cap(q, cfg);
      bool ok = c.allocated() <= 1.0 - cfg.p_ns + kSumSlack;
      for (const auto& [i, v] : c) ok = ok && v >= cfg.p_min && v <= q.get(i);
      for (const auto& [i, v] : q) ok = ok && !(v < cfg.p_min && c.contains(i));
      // Survivors keep their relative proportions.
      double alpha = c.empty() ? 1.0 : c.map().begin()->second / q.get(c.map().begin()->first);
      for (const auto& [i, v] : c) ok = ok && std::fabs(v - alpha * q.get(i)) <= 1e-15;
      if (raw_kept <= 1.0 - cfg.p_ns) {
        for (const auto& [i, v] : c) ok = ok && v == q.get(i);
      }
      ok = ok && filter_cap(c.map(), cfg) == c;
      bad += !ok;
    }
    out.push_back(holds("filter_cap postconditions", bad == 0,
                        std::to_string(bad) + " violations in 1e5 cases"));
  }
  return out;
}

std::vector<Check> boundary_math() {
  std::vector<Check> out = {
      near("p0(0.01)", distortion_threshold(0.01), 0.027, 1e-3, 6),
      near("p0(0.001)", distortion_threshold(0.001), 0.00272, 1e-3, 6),
      near("p0(0.1)", distortion_threshold(0.1), 0.24, 1e-3, 6),
  };
  Rng rng(91);
  double worst_low = 0.0, worst_high = 0.0;
  for (int trial = 0; trial < 100000; ++trial) {
    double p = rng.uniform(0.001, 0.3);
    FcConfig cfg{p, p};
    PrMap q;
    std::size_t n = rng.below(10);
    double left = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double v = rng.uniform01() * left;
      if (v > 0.0) q.set(i, v);
      left -= v;
    }
    double loss = logloss_rule_ns(rng.below(12), q, rng.bernoulli(0.5), cfg);
    worst_low = std::min(worst_low, loss);
    worst_high = std::max(worst_high, loss - (-std::log(p)));
  }
  out.push_back(holds("LogLossNS in [0, -ln p_ns]", worst_low >= 0.0 && worst_high <= 1e-12,
                      "min " + fmt(worst_low) + ", max excess " + fmt(worst_high, 15)));
  return out;
}

std::vector<Check> pr_spread() {
  std::vector<Check> out;
  auto adversarial = [](Rng& rng, std::vector<ItemId>& obs) {
    obs.clear();
    std::size_t alphabet = 2 + rng.below(30);
    ItemId fresh = 1000;
    while (obs.size() < 300) {
      switch (rng.below(3)) {
        case 0: {  // run of one item
          ItemId i = rng.below(alphabet);
          for (std::uint64_t r = 1 + rng.below(8); r > 0; --r) obs.push_back(i);
          break;
        }
        case 1:  // never-repeated items
          for (std::uint64_t r = 1 + rng.below(8); r > 0; --r) obs.push_back(fresh++);
          break;
        default:
          obs.push_back(rng.below(alphabet));
      }
    }
  };
  Rng rng(101);
  std::vector<ItemId> obs;
  std::size_t mle_bad = 0, q2_bad = 0;
  for (int trace = 0; trace < 10000; ++trace) {
    adversarial(rng, obs);
    QueueMap qm(2);
    for (ItemId o : obs) {
      qm.update(o);
      std::vector<double> mle, pr;
      for (const auto& [i, q] : qm.queues()) {
        mle.push_back(1.0 / static_cast<double>(q.cell0()));
        pr.push_back(q.pr());
      }
      for (int j = 0; j < 4; ++j) {
        double p = j == 0 ? rng.uniform(0.01, 1.0) : 1.0 / static_cast<double>(1 + rng.below(12));
        double n = 0.0;
        for (double v : mle) n += v > p;
        mle_bad += !(n < 1.0 / p);
      }
      for (std::size_t k = 1; k <= 12; ++k) {
        std::size_t n = 0;
        for (double v : pr) n += v > 1.0 / static_cast<double>(k);
        q2_bad += n > k - 1;
      }
    }
  }
  out.push_back(holds("N(Q,p) < 1/p, single-cell MLE", mle_bad == 0,
                      std::to_string(mle_bad) + " violations over 1e4 traces"));
  out.push_back(holds("N(Q,1/k) <= k-1, qcap=2", q2_bad == 0,
                      std::to_string(q2_bad) + " violations over 1e4 traces"));
  return out;
}

std::vector<Check> ingestion_path() {
  std::vector<Check> out;
  fs::path dir = fs::temp_directory_path() / "sparsema_acceptance_ingest";
  fs::create_directories(dir);
  Rng rng(111);
  {
    std::ofstream f(dir / "cmds.txt");
    for (int i = 0; i < 5000; ++i) f << "cmd" << rng.below(60) << "\n";
  }
  auto a = ingest_sequence(dir / "cmds.txt");
  auto b = ingest_sequence(dir / "cmds.txt");
  bool first_seen = true;
  ItemId next = 0;
  for (ItemId id : a) {
    if (id > next) first_seen = false;
    if (id == next) ++next;
  }
  out.push_back(holds("deterministic first-seen interning", a == b && first_seen && a.size() == 5000,
                      std::to_string(a.size()) + " ids, " + std::to_string(next) + " distinct"));
  fs::remove_all(dir);

  bool window_ok = true;
  Referee ref(RefereeConfig{2, 200});
  for (std::uint64_t t = 1; t <= a.size(); ++t) {
    window_ok = window_ok && ref.total() == std::min<std::uint64_t>(t - 1, 200);
    ref.is_ns(a[t - 1]);
  }
  out.push_back(holds("referee window accounting, W=200", window_ok, "sum == min(t-1, W)"));

  auto stream = [&](bool drift) {
    std::vector<ItemId> obs;
    Rng r(112);
    for (int t = 0; t < 2000; ++t) {
      ItemId base = drift && t >= 1000 ? 4 : 1;
      double u = r.uniform01();
      obs.push_back(u < 0.7 ? base : u < 0.9 ? base + 1 : base + 2);
    }
    return obs;
  };
  PredictorSpec dyal = parse_predictor_spec("dyal:0.01");
  SelfConcatResult flat = run_self_concat(stream(false), 10, {dyal}, dyal, {}, EvalConfig{});
  SelfConcatResult drift = run_self_concat(stream(true), 10, {dyal}, dyal, {}, EvalConfig{});
  std::size_t flat_late = 0, drift_late = 0, drift_min = SIZE_MAX;
  for (std::size_t p = 1; p < 10; ++p) {
    flat_late += flat.spikes_per_pass[p];
    drift_late += drift.spikes_per_pass[p];
    drift_min = std::min(drift_min, drift.spikes_per_pass[p]);
  }
  out.push_back(holds("self-concat: spikes recur every pass on drift, fewer when stationary",
                      drift_min >= 1 && drift_late >= 2 * flat_late,
                      "later-pass spikes drift=" + std::to_string(drift_late) +
                          " stationary=" + std::to_string(flat_late)));
  return out;
}

}  // namespace
}  // namespace sparsema

int main() {
  using namespace sparsema;
  const std::vector<Criterion> criteria = {
      {"C1", "plain-counting deviations", plain_counting},
      {"C2", "stationary single-item deviations", stationary_single},
      {"C3", "non-stationary single-item deviations", nonstationary_single},
      {"C4", "multi-item losses", multi_item},
      {"C5", "dyal vs box pairing", box_pairing},
      {"C6", "estimator suite", estimators},
      {"C7", "ema convergence", ema_convergence},
      {"C8", "exactness properties", exactness},
      {"C9", "boundary math", boundary_math},
      {"C10", "pr-spread lemmas", pr_spread},
      {"ING", "ingestion path properties", ingestion_path},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::vector<Check> checks = c.run();
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool pass = true;
    for (const auto& k : checks) pass = pass && k.pass;
    failed += !pass;
    std::printf("%s %-4s %s (%.1fs)\n", pass ? "PASS" : "FAIL", c.id.c_str(), c.title.c_str(),
                secs);
    for (const auto& k : checks) {
      std::printf("       %s %s: %s\n", k.pass ? "ok  " : "MISS", k.what.c_str(), k.detail.c_str());
    }
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
