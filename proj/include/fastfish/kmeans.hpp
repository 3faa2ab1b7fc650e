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

#ifndef FASTFISH_KMEANS_HPP_
#define FASTFISH_KMEANS_HPP_

#include "fastfish/common.hpp"

#include <optional>
#include <random>
#include <vector>

namespace fastfish {

struct KMeansOptions {
  int max_iterations = 100;
  /// Converged when no centroid moves farther than this.
  double tolerance = 1e-6;
};

struct KMeansResult {
  MatrixXd centroids;  // k x D
  std::vector<Index> assignment;
  int iterations = 0;
};

/// k-means++ seeding over the rows of `points`. The first center is `first`
/// when given, otherwise uniform. Later centers are drawn proportional to the
/// squared distance to the nearest chosen center; if every remaining row
/// coincides with a center, an unchosen row is drawn uniformly, so the result
/// always holds k distinct rows.
std::vector<Index> kmeanspp_seeds(const Eigen::Ref<const MatrixXd>& points, Index k, std::mt19937_64& rng,
                                  std::optional<Index> first = std::nullopt);

/// Lloyd iterations from a k-means++ start. Empty clusters are reseeded to the
/// row farthest from its assigned centroid.
KMeansResult kmeans(const Eigen::Ref<const MatrixXd>& points, Index k, std::uint64_t seed,
                    const KMeansOptions& options = {});

}  // namespace fastfish

#endif  // FASTFISH_KMEANS_HPP_
