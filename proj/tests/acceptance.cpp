// Copyright 2026 The fastfish Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "fastfish/bait.hpp"
#include "fastfish/bench.hpp"
#include "fastfish/classifier.hpp"
#include "fastfish/harness.hpp"
#include "fastfish/metrics.hpp"
#include "fastfish/synthetic.hpp"
#include "oracles.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>

namespace ff = fastfish;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double budget_seconds, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (secs > budget_seconds) {
    o.pass = false;
    o.detail += fmt::format("; over time budget {:.0f}s", budget_seconds);
  }
  if (!o.pass) ++failures;
  fmt::print("{} {} ({:.1f}s): {}\n", o.pass ? "PASS" : "FAIL", name, secs, o.detail);
  std::fflush(stdout);
}

struct Draw {
  VectorXd h, p;
};

std::vector<Draw> draws(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dd(1, 8), kk(2, 6);
  std::vector<Draw> out;
  for (int i = 0; i < count; ++i) {
    const int d = dd(rng), k = kk(rng);
    out.push_back({oracle::random_vector(d, rng), oracle::random_probs(k, rng)});
  }
  return out;
}

Outcome exact_oracle() {
  double worst = 0;
  for (const auto& x : draws(100, 1)) {
    const MatrixXd f = ff::fim_exact(x.h, x.p).materialize();
    worst = std::max({worst, oracle::max_abs(f - oracle::exact_fim(x.h, x.p)),
                      oracle::max_abs(f - oracle::kronecker_fim(x.h, x.p))});
  }
  return {worst <= 1e-10, fmt::format("max abs error {:.2e} over 100 draws (tol 1e-10)", worst)};
}

Outcome topc_recovery() {
  double worst = 0;
  for (const auto& x : draws(100, 1)) {
    const int k = static_cast<int>(x.p.size());
    worst = std::max(worst, oracle::max_abs(ff::fim_topc(x.h, x.p, k).materialize() - ff::fim_exact(x.h, x.p).materialize()));
  }
  return {worst <= 1e-10, fmt::format("max abs error {:.2e} with c = K (tol 1e-10)", worst)};
}

Outcome binary_identities() {
  double worst_trace = 0;
  int rank_violations = 0;
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const VectorXd h = oracle::random_vector(1 + i % 8, rng);
    const VectorXd p = oracle::random_probs(2 + i % 5, rng);
    const auto f = ff::fim_binary(h, p);
    const MatrixXd m = f.materialize();
    const VectorXd sv = Eigen::JacobiSVD<MatrixXd>(m).singularValues();
    if (f.rank() > 1 || (sv.array() > 1e-12 * std::max(1.0, sv(0))).count() > 1) ++rank_violations;
    const double q = p.maxCoeff();
    worst_trace = std::max(worst_trace, std::abs(m.trace() - q * (1 - q) * h.squaredNorm()));
  }
  return {rank_violations == 0 && worst_trace <= 1e-12,
          fmt::format("rank violations {}, max trace error {:.2e} (tol 1e-12)", rank_violations, worst_trace)};
}

Outcome greedy_oracle() {
  const int n = 50, d = 4, k = 3, labeled_count = 10;
  std::mt19937_64 rng(3);
  MatrixXd x(n, d), p(n, k), w(k, d);
  for (int j = 0; j < k; ++j) w.row(j) = oracle::random_vector(d, rng).transpose();
  for (int i = 0; i < n; ++i) {
    x.row(i) = oracle::random_vector(d, rng).transpose();
    p.row(i) = ff::softmax(w * x.row(i).transpose()).transpose();
  }
  std::vector<ff::Index> labeled;
  std::vector<long> ol, oc;
  ff::AcquisitionRequest req;
  req.batch_size = 5;
  for (int i = 0; i < n; ++i) {
    if (i < labeled_count) labeled.push_back(i), ol.push_back(i);
    else req.candidates.push_back(i), oc.push_back(i);
  }
  const std::vector<std::pair<ff::FimKind, oracle::Kind>> kinds = {{ff::fim::Exact{}, oracle::Kind::Exact},
                                                                   {ff::fim::TopC{2}, oracle::Kind::TopC},
                                                                   {ff::fim::Binary{}, oracle::Kind::Binary},
                                                                   {ff::fim::Diagonal{}, oracle::Kind::Diagonal}};
  int mismatches = 0;
  double worst = 0;
  std::string notes;
  for (const auto& [kind, okind] : kinds) {
    for (bool backward : {false, true}) {
      req.mode = backward ? ff::GreedyMode::ForwardBackward : ff::GreedyMode::ForwardOnly;
      const auto got = ff::bait_select(x, p, labeled, req, kind, 1.0);
      const auto want = oracle::dense_greedy(x, p, ol, oc, 5, backward, okind, 1.0, 2);
      const bool same = std::equal(got.indices.begin(), got.indices.end(), want.indices.begin(), want.indices.end());
      if (!same || got.objective.size() != want.objective.size()) {
        ++mismatches;
        notes += " " + ff::to_string(kind) + (backward ? "/fb" : "/fwd");
        continue;
      }
      for (std::size_t i = 0; i < got.objective.size(); ++i) worst = std::max(worst, std::abs(got.objective[i] - want.objective[i]));
    }
  }
  return {mismatches == 0 && worst <= 1e-8,
          fmt::format("8 kind/mode pairs, index mismatches {}{}, max objective error {:.2e} (tol 1e-8)", mismatches,
                      notes, worst)};
}

Outcome complexity() {
  std::map<std::pair<std::string, ff::Index>, double> t;
  const auto bench = [&](ff::FimKind kind, std::vector<ff::Index> ks) {
    ff::BenchOptions o;
    o.d = 64;
    o.n = 500;
    o.reps = 1;
    o.k_list = std::move(ks);
    o.kinds = {kind};
    for (const auto& row : ff::bench_fim(o)) t[{row.kind, row.k}] = row.fim_seconds;
  };
  bench(ff::fim::Binary{}, {10, 200});
  bench(ff::fim::TopC{2}, {20});
  bench(ff::fim::Exact{}, {5, 10, 20, 40});
  const double binary_ratio = t[{"binary", 200}] / t[{"binary", 10}];
  const bool a = binary_ratio <= 2.0;
  const std::vector<double> exact = {t[{"exact", 5}], t[{"exact", 10}], t[{"exact", 20}], t[{"exact", 40}]};
  const bool b = exact[0] < exact[1] && exact[1] < exact[2] && exact[2] < exact[3];
  const double speedup = t[{"exact", 20}] / t[{"topc:2", 20}];
  const bool c = speedup >= 2.0;
  return {a && b && c,
          fmt::format("(a) binary K200/K10 = {:.2f} (<= 2) {}; (b) exact K=5,10,20,40: {:.2e} {:.2e} {:.2e} {:.2e} s {}; "
                      "(c) exact/topc:2 at K=20 = {:.1f}x (>= 2) {}",
                      binary_ratio, a ? "ok" : "bad", exact[0], exact[1], exact[2], exact[3], b ? "ok" : "bad", speedup,
                      c ? "ok" : "bad")};
}

Outcome gradient_check() {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> kk(2, 6), dd(1, 8), nn(1, 30);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int k = kk(rng), d = dd(rng), n = nn(rng);
    ff::ClassifierParams params{MatrixXd(k, d), VectorXd(k)};
    for (int j = 0; j < k; ++j) params.weights.row(j) = oracle::random_vector(d, rng).transpose();
    params.bias = oracle::random_vector(k, rng);
    MatrixXd xs(n, d);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      xs.row(i) = oracle::random_vector(d, rng).transpose();
      y[static_cast<std::size_t>(i)] = std::uniform_int_distribution<int>(0, k - 1)(rng);
    }
    const double wd = trial % 2 ? 1e-4 : 0.05;
    const auto lg = ff::loss_and_grad(params, xs, y, wd);
    const double eps = 1e-6;
    double num = 0, den = 0;
    const auto probe = [&](double& slot, double analytic) {
      const double keep = slot;
      slot = keep + eps;
      const double up = ff::loss_and_grad(params, xs, y, wd).loss;
      slot = keep - eps;
      const double down = ff::loss_and_grad(params, xs, y, wd).loss;
      slot = keep;
      const double fd = (up - down) / (2 * eps);
      num += (fd - analytic) * (fd - analytic);
      den += fd * fd;
    };
    for (int j = 0; j < k; ++j) {
      for (int t = 0; t < d; ++t) probe(params.weights(j, t), lg.gradient.weights(j, t));
      probe(params.bias(j), lg.gradient.bias(j));
    }
    worst = std::max(worst, std::sqrt(num) / std::max(std::sqrt(den), 1e-12));
  }
  return {worst <= 1e-5, fmt::format("max relative error {:.2e} over 20 configs (tol 1e-5)", worst)};
}

struct Mixture {
  ff::EmbeddingDataset train, test;
};

const Mixture& mixture() {
  static const Mixture m = [] {
    auto [train, test] = ff::split_rows(ff::gen_synthetic(4000, 16, 8, 3.0, 0.05, 0), 2000);
    return Mixture{std::move(train), std::move(test)};
  }();
  return m;
}

ff::ExperimentConfig acceptance_config(const std::string& strategy) {
  ff::ExperimentConfig c;
  c.strategy = ff::parse_strategy(strategy);
  c.initial_labeled = 20;
  c.acquisition_size = 10;
  c.total_budget = 200;
  c.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  return c;
}

double mean_auc(const std::vector<ff::SeedRun>& runs) {
  double total = 0;
  for (const auto& r : runs) {
    if (!r.ok()) throw ff::Error("run", fmt::format("seed {} failed: {}", r.seed, r.error));
    std::vector<double> acc;
    for (const auto& rec : r.records) acc.push_back(rec.test_accuracy);
    total += 100.0 * ff::auc(acc);
  }
  return total / static_cast<double>(runs.size());
}

std::map<std::string, std::vector<ff::SeedRun>> e2e_runs;

Outcome end_to_end() {
  const auto& m = mixture();
  std::map<std::string, double> auc;
  for (const char* s : {"random", "margin", "bait:binary", "bait:topc:2"}) {
    e2e_runs[s] = ff::run_experiment(acceptance_config(s), m.train, m.test);
    auc[s] = mean_auc(e2e_runs[s]);
  }
  const double bb = auc["bait:binary"] - auc["random"];
  const double bt = auc["bait:topc:2"] - auc["random"];
  const double mg = auc["margin"] - auc["random"];
  return {bb >= 1.0 && bt >= 1.0 && mg >= 0.0,
          fmt::format("AUC random {:.2f}, margin {:.2f} ({:+.2f}, need >= 0), bait:binary {:.2f} ({:+.2f}, need >= 1), "
                      "bait:topc:2 {:.2f} ({:+.2f}, need >= 1)",
                      auc["random"], auc["margin"], mg, auc["bait:binary"], bb, auc["bait:topc:2"], bt)};
}

Outcome determinism() {
  const auto& m = mixture();
  int compared = 0, differing = 0;
  for (const char* s : {"random", "bait:binary"}) {
    auto first = e2e_runs.count(s) ? ff::all_records(e2e_runs[s])
                                   : ff::all_records(ff::run_experiment(acceptance_config(s), m.train, m.test));
    auto again = ff::all_records(ff::run_experiment(acceptance_config(s), m.train, m.test));
    for (auto* v : {&first, &again})
      for (auto& r : *v) r.acquisition_seconds = 0;
    ++compared;
    if (first != again) ++differing;
  }
  // a small config under different thread caps
  auto c = acceptance_config("bait:topc:2");
  c.seeds = {0, 1};
  c.total_budget = 60;
  ff::set_thread_count(1);
  auto one = ff::all_records(ff::run_experiment(c, m.train, m.test));
  ff::set_thread_count(4);
  auto four = ff::all_records(ff::run_experiment(c, m.train, m.test));
  ff::set_thread_count(0);
  for (auto* v : {&one, &four})
    for (auto& r : *v) r.acquisition_seconds = 0;
  ++compared;
  if (one != four) ++differing;
  return {differing == 0, fmt::format("{} repeated experiments, {} differ outside timing fields", compared, differing)};
}

Outcome property_suites() {
  const std::string cmd = std::string(FASTFISH_UNIT_TESTS) + " --gtest_brief=1 > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  const int status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return {status == 0, fmt::format("unit and property suites exit status {}", status)};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  criterion("exact-fim-oracle", 1, exact_oracle);
  criterion("topc-recovery", 1, topc_recovery);
  criterion("binary-identities", 1, binary_identities);
  criterion("greedy-oracle", 10, greedy_oracle);
  criterion("complexity", 120, complexity);
  criterion("gradient-check", 10, gradient_check);
  criterion("end-to-end-gain", 900, end_to_end);
  criterion("determinism", 300, determinism);
  criterion("property-suites", 900, property_suites);
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
