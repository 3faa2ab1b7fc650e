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

#include "fastfish/kmeans.hpp"

#include <limits>

namespace fastfish {

namespace {

std::vector<Index> nearest(const Eigen::Ref<const MatrixXd>& points, const MatrixXd& centroids,
                           VectorXd& distance) {
  const Index n = points.rows();
  std::vector<Index> out(static_cast<std::size_t>(n));
  distance.resize(n);
  const VectorXd c_norm = centroids.rowwise().squaredNorm();
  const MatrixXd cross = points * centroids.transpose();  // n x k
  for (Index i = 0; i < n; ++i) {
    const double p_norm = points.row(i).squaredNorm();
    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centroids.rows(); ++c) {
      const double d = std::max(0.0, p_norm - 2.0 * cross(i, c) + c_norm(c));
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    out[static_cast<std::size_t>(i)] = best;
    distance(i) = best_d;
  }
  return out;
}

}  // namespace

std::vector<Index> kmeanspp_seeds(const Eigen::Ref<const MatrixXd>& points, Index k, std::mt19937_64& rng,
                                  std::optional<Index> first) {
  const Index n = points.rows();
  if (k < 1 || k > n) throw InvalidParameter("k-means++ needs 1 <= k <= n");
  std::vector<Index> centers;
  centers.reserve(static_cast<std::size_t>(k));
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

  const auto add = [&](Index c) {
    centers.push_back(c);
    chosen[static_cast<std::size_t>(c)] = 1;
    for (Index i = 0; i < n; ++i) {
      const double d = (points.row(i) - points.row(c)).squaredNorm();
      d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], d);
    }
  };

  if (first) {
    if (*first < 0 || *first >= n) throw IndexError("first k-means++ center out of range");
    add(*first);
  } else {
    add(std::uniform_int_distribution<Index>(0, n - 1)(rng));
  }
  while (static_cast<Index>(centers.size()) < k) {
    double total = 0;
    for (Index i = 0; i < n; ++i)
      if (!chosen[static_cast<std::size_t>(i)]) total += d2[static_cast<std::size_t>(i)];
    Index next = -1;
    if (total > 0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (Index i = 0; i < n; ++i) {
        if (chosen[static_cast<std::size_t>(i)]) continue;
        const double w = d2[static_cast<std::size_t>(i)];
        if (w <= 0) continue;
        next = i;
        if (r < w) break;
        r -= w;
      }
    }
    if (next < 0) {
      // All remaining rows sit on a center.
      std::vector<Index> free;
      for (Index i = 0; i < n; ++i)
        if (!chosen[static_cast<std::size_t>(i)]) free.push_back(i);
      next = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
    }
    add(next);
  }
  return centers;
}

KMeansResult kmeans(const Eigen::Ref<const MatrixXd>& points, Index k, std::uint64_t seed,
                    const KMeansOptions& options) {
  const Index n = points.rows();
  if (k < 1 || k > n) throw InvalidParameter("k-means needs 1 <= k <= n");
  std::mt19937_64 rng(seed);
  KMeansResult result;
  result.centroids.resize(k, points.cols());
  const auto seeds = kmeanspp_seeds(points, k, rng);
  for (Index c = 0; c < k; ++c) result.centroids.row(c) = points.row(seeds[static_cast<std::size_t>(c)]);

  VectorXd distance;
  for (int it = 0; it < options.max_iterations; ++it) {
    result.assignment = nearest(points, result.centroids, distance);
    result.iterations = it + 1;
    MatrixXd next = MatrixXd::Zero(k, points.cols());
    std::vector<Index> count(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      const Index c = result.assignment[static_cast<std::size_t>(i)];
      next.row(c) += points.row(i);
      ++count[static_cast<std::size_t>(c)];
    }
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    for (Index c = 0; c < k; ++c) {
      if (count[static_cast<std::size_t>(c)] > 0) {
        next.row(c) /= static_cast<double>(count[static_cast<std::size_t>(c)]);
        continue;
      }
      Index far = -1;
      for (Index i = 0; i < n; ++i)
        if (!taken[static_cast<std::size_t>(i)] && (far < 0 || distance(i) > distance(far))) far = i;
      taken[static_cast<std::size_t>(far)] = 1;
      distance(far) = 0;
      next.row(c) = points.row(far);
    }
    const double shift = (next - result.centroids).rowwise().norm().maxCoeff();
    result.centroids = std::move(next);
    if (shift < options.tolerance) break;
  }
  result.assignment = nearest(points, result.centroids, distance);
  return result;
}

}  // namespace fastfish
