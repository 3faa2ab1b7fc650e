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

#ifndef FASTFISH_HARNESS_HPP_
#define FASTFISH_HARNESS_HPP_

#include "fastfish/config.hpp"
#include "fastfish/dataset.hpp"
#include "fastfish/results.hpp"

#include <functional>
#include <mutex>
#include <span>
#include <vector>

namespace fastfish {

/// Labeled and unlabeled rows of the training split.
struct PoolState {
  std::vector<Index> labeled;
  std::vector<Index> unlabeled;

  /// Uniformly sampled initial labeled pool; the rest stays unlabeled in row order.
  static PoolState initial(Index pool_size, Index labeled_count, std::uint64_t seed);

  /// Moves rows from unlabeled to labeled. Throws InvalidRequest on duplicates
  /// or rows that are not currently unlabeled.
  void acquire(std::span<const Index> rows);

  /// Disjoint, duplicate-free, and covering [0, pool_size).
  bool is_partition(Index pool_size) const;
};

struct SelectionContext {
  const MatrixXd& features;  // whole training pool
  const MatrixXd& probs;     // current classifier on the whole pool
  const PoolState& pool;
  Index batch_size;
  std::uint64_t seed;  // strategy stream for this cycle
  std::uint64_t run_seed = 0;
  Index cycle = 0;
};

/// Returns `batch_size` rows taken from ctx.pool.unlabeled.
using Selector = std::function<std::vector<Index>(const SelectionContext&)>;

Selector make_selector(const StrategyKind& kind);

/// Thread-safe append-only record collection.
class RecordSink {
 public:
  void append(const CycleRecord& record);
  std::vector<CycleRecord> records() const;

 private:
  mutable std::mutex mutex_;
  std::vector<CycleRecord> records_;
};

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<CycleRecord> records;
  /// Non-empty when this seed aborted; `records` then holds the cycles
  /// completed before the failure.
  std::string error;

  bool ok() const { return error.empty(); }
};

struct RunOptions {
  /// Replaces the configured strategy (the records keep the configured id).
  Selector selector;
  RecordSink* sink = nullptr;
};

/// Reads the train/test datasets named in the config.
std::vector<SeedRun> run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// One run per seed, in parallel across seeds. Each run: train, evaluate,
/// time the selection, acquire; stop once the labeled pool reaches the
/// budget (after a final train/evaluate).
std::vector<SeedRun> run_experiment(const ExperimentConfig& config, const EmbeddingDataset& train,
                                    const EmbeddingDataset& test, const RunOptions& options = {});

std::vector<CycleRecord> all_records(std::span<const SeedRun> runs);

/// Header for a results file written from `config`.
ResultsHeader results_header(const ExperimentConfig& config);

}  // namespace fastfish

#endif  // FASTFISH_HARNESS_HPP_
