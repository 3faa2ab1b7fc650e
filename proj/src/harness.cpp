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

#include "fastfish/harness.hpp"

#include "fastfish/bait.hpp"
#include "fastfish/baselines.hpp"
#include "fastfish/classifier.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <numeric>
#include <random>
#include <unordered_set>

namespace fastfish {

namespace {

constexpr std::uint64_t kInitStream = 0x1a17;
constexpr std::uint64_t kTrainStream = 0x7a11;
constexpr std::uint64_t kStrategyStream = 0x5e1e;

std::vector<Index> map_rows(std::span<const Index> local, std::span<const Index> rows) {
  std::vector<Index> out;
  out.reserve(local.size());
  for (Index i : local) out.push_back(rows[static_cast<std::size_t>(i)]);
  return out;
}

MatrixXd gather(const MatrixXd& m, std::span<const Index> rows) {
  MatrixXd out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

void run_seed(SeedRun& run, const ExperimentConfig& config, const std::string& id, const Selector& select,
              const MatrixXd& train_x, const std::vector<int>& train_y, const MatrixXd& test_x,
              const std::vector<int>& test_y, int classes, RecordSink* sink) {
  const std::uint64_t seed = run.seed;
  PoolState pool = PoolState::initial(train_x.rows(), config.initial_labeled, derive_seed(seed, kInitStream));

  for (Index cycle = 0;; ++cycle) {
    const MatrixXd x = gather(train_x, pool.labeled);
    std::vector<int> y;
    y.reserve(pool.labeled.size());
    for (Index i : pool.labeled) y.push_back(train_y[static_cast<std::size_t>(i)]);
    TrainConfig tc = config.classifier;
    tc.seed = derive_seed(config.classifier.seed ^ seed, kTrainStream, static_cast<std::uint64_t>(cycle));
    const ClassifierParams params = train(x, y, classes, tc);

    CycleRecord rec;
    rec.cycle = cycle;
    rec.labeled_count = static_cast<Index>(pool.labeled.size());
    rec.test_accuracy = evaluate(params, test_x, test_y);
    rec.strategy = id;
    rec.seed = seed;

    if (rec.labeled_count >= config.total_budget) {
      run.records.push_back(rec);
      if (sink) sink->append(rec);
      break;
    }

    const MatrixXd probs = predict_proba(params, train_x);
    const SelectionContext ctx{train_x, probs, pool, config.acquisition_size,
                               derive_seed(seed, kStrategyStream, static_cast<std::uint64_t>(cycle)), seed, cycle};
    const auto t0 = std::chrono::steady_clock::now();
    rec.selected = select(ctx);
    const auto t1 = std::chrono::steady_clock::now();
    rec.acquisition_seconds = std::chrono::duration<double>(t1 - t0).count();
    if (static_cast<Index>(rec.selected.size()) != config.acquisition_size)
      throw InvalidRequest("strategy returned " + std::to_string(rec.selected.size()) + " rows, expected " +
                           std::to_string(config.acquisition_size));
    pool.acquire(rec.selected);
    run.records.push_back(rec);
    if (sink) sink->append(rec);
  }
}

}  // namespace

PoolState PoolState::initial(Index pool_size, Index labeled_count, std::uint64_t seed) {
  PoolState s;
  s.labeled = random_select(pool_size, labeled_count, seed);
  std::vector<char> taken(static_cast<std::size_t>(pool_size), 0);
  for (Index i : s.labeled) taken[static_cast<std::size_t>(i)] = 1;
  for (Index i = 0; i < pool_size; ++i)
    if (!taken[static_cast<std::size_t>(i)]) s.unlabeled.push_back(i);
  return s;
}

void PoolState::acquire(std::span<const Index> rows) {
  std::unordered_set<Index> incoming;
  for (Index r : rows)
    if (!incoming.insert(r).second) throw InvalidRequest("row " + std::to_string(r) + " selected twice");
  const std::size_t before = unlabeled.size();
  std::erase_if(unlabeled, [&](Index r) { return incoming.contains(r); });
  if (before - unlabeled.size() != rows.size())
    throw InvalidRequest("selection contains rows that are not in the unlabeled pool");
  labeled.insert(labeled.end(), rows.begin(), rows.end());
}

bool PoolState::is_partition(Index pool_size) const {
  if (static_cast<Index>(labeled.size() + unlabeled.size()) != pool_size) return false;
  std::vector<char> seen(static_cast<std::size_t>(pool_size), 0);
  for (const auto* part : {&labeled, &unlabeled})
    for (Index r : *part) {
      if (r < 0 || r >= pool_size || seen[static_cast<std::size_t>(r)]) return false;
      seen[static_cast<std::size_t>(r)] = 1;
    }
  return true;
}

Selector make_selector(const StrategyKind& kind) {
  return std::visit(
      [](const auto& s) -> Selector {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, strategy::Random>) {
          return [](const SelectionContext& c) {
            const auto& u = c.pool.unlabeled;
            return map_rows(random_select(static_cast<Index>(u.size()), c.batch_size, c.seed), u);
          };
        } else if constexpr (std::is_same_v<S, strategy::Margin>) {
          return [](const SelectionContext& c) {
            const auto& u = c.pool.unlabeled;
            return map_rows(margin_select(gather(c.probs, u), c.batch_size), u);
          };
        } else if constexpr (std::is_same_v<S, strategy::Badge>) {
          return [](const SelectionContext& c) {
            const auto& u = c.pool.unlabeled;
            return map_rows(badge_select(gather(c.features, u), gather(c.probs, u), c.batch_size, c.seed), u);
          };
        } else if constexpr (std::is_same_v<S, strategy::Typiclust>) {
          return [k_nn = s.k_nn](const SelectionContext& c) {
            return typiclust_select(c.features, c.pool.labeled, c.batch_size, k_nn, c.seed);
          };
        } else {
          return [s](const SelectionContext& c) {
            AcquisitionRequest req;
            req.batch_size = c.batch_size;
            req.candidates = c.pool.unlabeled;
            req.mode = s.mode;
            req.max_candidates = s.max_candidates;
            req.seed = c.seed;
            return bait_select(c.features, c.probs, c.pool.labeled, req, s.fim, s.lambda).indices;
          };
        }
      },
      kind);
}

void RecordSink::append(const CycleRecord& record) {
  std::lock_guard lock(mutex_);
  records_.push_back(record);
}

std::vector<CycleRecord> RecordSink::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::vector<SeedRun> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const EmbeddingDataset train = read_embeddings(config.train_path);
  const EmbeddingDataset test = read_embeddings(config.test_path);
  return run_experiment(config, train, test, options);
}

std::vector<SeedRun> run_experiment(const ExperimentConfig& config, const EmbeddingDataset& train,
                                    const EmbeddingDataset& test, const RunOptions& options) {
  validate(config);
  std::vector<std::string> problems;
  if (train.dim() != test.dim())
    problems.push_back("train and test feature dimensions differ (" + std::to_string(train.dim()) + " vs " +
                       std::to_string(test.dim()) + ")");
  if (train.num_classes != test.num_classes) problems.push_back("train and test class counts differ");
  if (train.num_classes < 2) problems.push_back("need at least two classes");
  if (config.total_budget > train.size())
    problems.push_back("al.total_budget " + std::to_string(config.total_budget) + " exceeds train size " +
                       std::to_string(train.size()));
  if (const auto* t = std::get_if<strategy::Bait>(&config.strategy)) {
    try {
      validate_kind(t->fim, train.num_classes);
    } catch (const Error& e) {
      problems.push_back(std::string("strategy: ") + e.what());
    }
  }
  if (!problems.empty()) throw ConfigError(problems);

  const MatrixXd train_x = train.features_f64();
  const MatrixXd test_x = test.features_f64();
  const std::string id = strategy_id(config.strategy);
  const Selector select = options.selector ? options.selector : make_selector(config.strategy);

  std::vector<SeedRun> runs(config.seeds.size());
  parallel_for(static_cast<Index>(config.seeds.size()), [&](Index i) {
    SeedRun& run = runs[static_cast<std::size_t>(i)];
    run.seed = config.seeds[static_cast<std::size_t>(i)];
    try {
      run_seed(run, config, id, select, train_x, train.labels, test_x, test.labels, train.num_classes, options.sink);
    } catch (const std::exception& e) {
      spdlog::error("strategy {} seed {} aborted: {}", id, run.seed, e.what());
      run.error = e.what();
    }
  });
  return runs;
}

std::vector<CycleRecord> all_records(std::span<const SeedRun> runs) {
  std::vector<CycleRecord> out;
  for (const auto& r : runs) out.insert(out.end(), r.records.begin(), r.records.end());
  return out;
}

ResultsHeader results_header(const ExperimentConfig& config) {
  ResultsHeader h;
  h.config_hash = config_hash(config);
  h.strategy = strategy_id(config.strategy);
  h.config = to_json(config);
  return h;
}

}  // namespace fastfish
