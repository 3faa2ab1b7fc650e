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

#include "fastfish/baselines.hpp"

#include "fastfish/fisher.hpp"
#include "fastfish/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace fastfish {

namespace {

void check_batch(Index batch, Index pool) {
  if (batch < 1) throw InvalidRequest("batch size must be >= 1");
  if (batch > pool)
    throw InvalidRequest("batch size " + std::to_string(batch) + " exceeds pool size " + std::to_string(pool));
}

}  // namespace

std::vector<Index> random_select(Index pool_size, Index batch, std::uint64_t seed) {
  check_batch(batch, pool_size);
  std::vector<Index> order(static_cast<std::size_t>(pool_size));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  for (Index i = 0; i < batch; ++i) {
    const Index j = std::uniform_int_distribution<Index>(i, pool_size - 1)(rng);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  order.resize(static_cast<std::size_t>(batch));
  return order;
}

std::vector<Index> margin_select(const Eigen::Ref<const MatrixXd>& probs, Index batch) {
  const Index n = probs.rows();
  check_batch(batch, n);
  if (probs.cols() < 2) throw InvalidInput("margin needs at least two classes");
  std::vector<double> margin(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    double first = -1, second = -1;
    for (Index k = 0; k < probs.cols(); ++k) {
      const double v = probs(i, k);
      if (v > first) {
        second = first;
        first = v;
      } else if (v > second) {
        second = v;
      }
    }
    margin[static_cast<std::size_t>(i)] = first - second;
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return margin[static_cast<std::size_t>(a)] < margin[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(batch));
  return order;
}

std::vector<Index> badge_select(const Eigen::Ref<const MatrixXd>& features, const Eigen::Ref<const MatrixXd>& probs,
                                Index batch, std::uint64_t seed) {
  const Index n = features.rows();
  check_batch(batch, n);
  if (probs.rows() != n) throw InvalidInput("features and probabilities disagree on instance count");
  MatrixXd embedding(n, features.cols() * probs.cols());
  for (Index i = 0; i < n; ++i) {
    const VectorXd p = probs.row(i).transpose();
    embedding.row(i) = class_gradient(features.row(i).transpose(), p, detail::argmax_class(p)).transpose();
  }
  Index first = 0;
  const VectorXd norms = embedding.rowwise().squaredNorm();
  for (Index i = 1; i < n; ++i)
    if (norms(i) > norms(first)) first = i;
  std::mt19937_64 rng(seed);
  return kmeanspp_seeds(embedding, batch, rng, first);
}

double typicality(const Eigen::Ref<const MatrixXd>& features, std::span<const Index> members, Index row,
                  Index k_nn) {
  const Index k = std::min<Index>(k_nn, static_cast<Index>(members.size()) - 1);
  if (k < 1) return std::numeric_limits<double>::infinity();
  std::vector<double> d;
  d.reserve(members.size());
  for (Index m : members)
    if (m != row) d.push_back((features.row(m) - features.row(row)).norm());
  std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
  const double mean = std::accumulate(d.begin(), d.begin() + k, 0.0) / static_cast<double>(k);
  return mean > 0 ? 1.0 / mean : std::numeric_limits<double>::infinity();
}

std::vector<Index> typiclust_select(const Eigen::Ref<const MatrixXd>& features, std::span<const Index> labeled,
                                    Index batch, Index k_nn, std::uint64_t seed) {
  const Index n = features.rows();
  if (batch < 1) throw InvalidRequest("batch size must be >= 1");
  if (k_nn < 1) throw InvalidParameter("typiclust needs k_nn >= 1");
  const Index clusters = static_cast<Index>(labeled.size()) + batch;
  if (clusters > n)
    throw InvalidRequest("|labeled| + batch = " + std::to_string(clusters) + " exceeds pool size " +
                         std::to_string(n));

  std::vector<char> is_labeled(static_cast<std::size_t>(n), 0);
  for (Index i : labeled) {
    if (i < 0 || i >= n) throw IndexError("labeled index " + std::to_string(i) + " out of range");
    is_labeled[static_cast<std::size_t>(i)] = 1;
  }

  const KMeansResult km = kmeans(features, clusters, seed);
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(clusters));
  std::vector<char> covered(static_cast<std::size_t>(clusters), 0);
  for (Index i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(km.assignment[static_cast<std::size_t>(i)]);
    members[c].push_back(i);
    if (is_labeled[static_cast<std::size_t>(i)]) covered[c] = 1;
  }

  // Uncovered clusters first, each group by size descending, then cluster id.
  std::vector<Index> order(static_cast<std::size_t>(clusters));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
    if (covered[ua] != covered[ub]) return covered[ua] < covered[ub];
    if (members[ua].size() != members[ub].size()) return members[ua].size() > members[ub].size();
    return a < b;
  });

  // Unlabeled members of each cluster ranked by typicality (ties by index).
  std::vector<std::vector<Index>> ranked(static_cast<std::size_t>(clusters));
  std::vector<std::size_t> cursor(static_cast<std::size_t>(clusters), 0);
  const auto rank_cluster = [&](Index c) {
    const auto& m = members[static_cast<std::size_t>(c)];
    std::vector<std::pair<double, Index>> scored;
    for (Index row : m)
      if (!is_labeled[static_cast<std::size_t>(row)]) scored.emplace_back(typicality(features, m, row, k_nn), row);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    auto& out = ranked[static_cast<std::size_t>(c)];
    for (const auto& s : scored) out.push_back(s.second);
  };

  std::vector<Index> picked;
  std::vector<char> ranked_done(static_cast<std::size_t>(clusters), 0);
  while (static_cast<Index>(picked.size()) < batch) {
    bool progress = false;
    for (Index c : order) {
      if (static_cast<Index>(picked.size()) == batch) break;
      const auto uc = static_cast<std::size_t>(c);
      if (!ranked_done[uc]) {
        rank_cluster(c);
        ranked_done[uc] = 1;
      }
      if (cursor[uc] < ranked[uc].size()) {
        picked.push_back(ranked[uc][cursor[uc]++]);
        progress = true;
      }
    }
    if (!progress) throw InvalidRequest("not enough unlabeled rows for typiclust");
  }
  return picked;
}

}  // namespace fastfish
