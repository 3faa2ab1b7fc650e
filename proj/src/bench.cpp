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

#include "fastfish/bench.hpp"

#include "fastfish/woodbury.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <random>

namespace fastfish {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// keeps the optimizer from dropping the timed work
volatile double g_sink = 0;

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("median of nothing");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) m = 0.5 * (m + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid)));
  return m;
}

std::vector<BenchRow> bench_fim(const BenchOptions& o) {
  if (o.d < 1 || o.n < 1 || o.reps < 1) throw InvalidParameter("bench sizes must be positive");
  if (o.k_list.empty() || o.kinds.empty()) throw InvalidParameter("bench needs at least one K and one kind");
  for (Index k : o.k_list)
    if (k < 2) throw InvalidParameter("bench K must be >= 2");

  std::vector<BenchRow> rows;
  for (const FimKind& kind : o.kinds) {
    for (Index k : o.k_list) {
      validate_kind(kind, k);
      std::mt19937_64 rng(derive_seed(o.seed, static_cast<std::uint64_t>(k)));
      std::normal_distribution<double> normal;
      MatrixXd h(o.n, o.d), probs(o.n, k);
      for (Index i = 0; i < o.n; ++i) {
        for (Index j = 0; j < o.d; ++j) h(i, j) = normal(rng);
        VectorXd logits(k);
        for (Index j = 0; j < k; ++j) logits(j) = normal(rng);
        probs.row(i) = softmax(logits).transpose();
      }

      BenchRow row;
      row.kind = to_string(kind);
      row.k = k;
      row.d = o.d;
      row.n = o.n;
      row.reps = o.reps;
      MatrixXd buffer;
      std::vector<double> times;
      times.reserve(static_cast<std::size_t>(o.n * o.reps));
      for (Index r = 0; r < o.reps; ++r) {
        for (Index i = 0; i < o.n; ++i) {
          const VectorXd hi = h.row(i).transpose();
          const VectorXd pi = probs.row(i).transpose();
          const auto t0 = Clock::now();
          if (is_diagonal(kind)) {
            g_sink = g_sink + fim_diagonal(hi, pi).sum();
          } else {
            // lower triangle only, the way pool_fim accumulates
            const FimFactor<double> f = fim_factor(hi, pi, kind, i);
            buffer.resize(f.dim(), f.dim());
            buffer.triangularView<Eigen::Lower>().setZero();
            buffer.selfadjointView<Eigen::Lower>().rankUpdate(f.columns);
            g_sink = g_sink + buffer(0, 0);
          }
          times.push_back(seconds_since(t0));
        }
      }
      row.fim_seconds = median(times);

      if (o.score && !is_diagonal(kind)) {
        // M^-1 = I / lambda and A averaged over a small prefix keep setup cheap
        const Index dim = fim_dimension(kind, o.d, k);
        const Index prefix = std::min<Index>(o.n, 32);
        const PoolFim<double> target = pool_fim(h.topRows(prefix), probs.topRows(prefix), kind);
        const BaitState<double> state = make_bait_state(target.matrix, 1.0, MatrixXd(dim, 0));
        std::vector<double> score_times;
        for (Index r = 0; r < o.reps; ++r) {
          for (Index i = 0; i < o.n; ++i) {
            const FimFactor<double> f = fim_factor(h.row(i).transpose().eval(), probs.row(i).transpose().eval(), kind, i);
            const auto t0 = Clock::now();
            g_sink = g_sink + woodbury_gain(state, f);
            score_times.push_back(seconds_since(t0));
          }
        }
        row.score_seconds = median(score_times);
      }
      spdlog::info("bench {} K={} fim {:.3e}s", row.kind, k, row.fim_seconds);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string bench_csv(std::span<const BenchRow> rows) {
  std::string out = "kind,k,d,n,reps,fim_seconds,score_seconds\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{:.6e},", r.kind, r.k, r.d, r.n, r.reps, r.fim_seconds);
    if (r.score_seconds) out += fmt::format("{:.6e}", *r.score_seconds);
    out += '\n';
  }
  return out;
}

}  // namespace fastfish
