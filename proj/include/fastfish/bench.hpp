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

#ifndef FASTFISH_BENCH_HPP_
#define FASTFISH_BENCH_HPP_

#include "fastfish/fisher.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fastfish {

struct BenchRow {
  std::string kind;
  Index k = 0;
  Index d = 0;
  Index n = 0;
  Index reps = 0;
  /// Median seconds per instance: factor construction plus accumulating V V^T
  /// into the lower triangle of a dense buffer.
  double fim_seconds = 0;
  /// Median seconds per candidate gain evaluation, when requested.
  std::optional<double> score_seconds;
};

struct BenchOptions {
  Index d = 64;
  std::vector<Index> k_list{10, 50, 200};
  Index n = 500;
  std::vector<FimKind> kinds{fim::Exact{}, fim::TopC{2}, fim::Binary{}};
  Index reps = 1;
  std::uint64_t seed = 0;
  bool score = false;
};

/// One row per (kind, K) in kind-major order. Instances are Gaussian features
/// with softmax probabilities of random logits.
std::vector<BenchRow> bench_fim(const BenchOptions& options);

std::string bench_csv(std::span<const BenchRow> rows);

double median(std::vector<double> values);

}  // namespace fastfish

#endif  // FASTFISH_BENCH_HPP_
