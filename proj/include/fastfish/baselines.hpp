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

// Baseline acquisition strategies. Indices returned by random, margin and
// badge are rows of the matrices passed in; typiclust returns rows of the
// full pool it is given.

#ifndef FASTFISH_BASELINES_HPP_
#define FASTFISH_BASELINES_HPP_

#include "fastfish/common.hpp"

#include <span>
#include <vector>

namespace fastfish {

/// Uniform sample of `batch` distinct indices from [0, pool_size).
std::vector<Index> random_select(Index pool_size, Index batch, std::uint64_t seed);

/// Rows with the smallest gap between the two highest probabilities, ties by index.
std::vector<Index> margin_select(const Eigen::Ref<const MatrixXd>& probs, Index batch);

/// Gradient embeddings vec((e_yhat - p) h^T) with yhat = argmax p, then
/// k-means++ seeding; the first center is the largest-norm embedding.
std::vector<Index> badge_select(const Eigen::Ref<const MatrixXd>& features, const Eigen::Ref<const MatrixXd>& probs,
                                Index batch, std::uint64_t seed);

/// 1 / mean distance to the k nearest neighbours among `members` (k capped at
/// |members| - 1). Singletons get +infinity.
double typicality(const Eigen::Ref<const MatrixXd>& features, std::span<const Index> members, Index row, Index k_nn);

/// Clusters all rows into |labeled| + batch groups, prefers the largest
/// clusters without labeled rows and takes the most typical unlabeled row
/// from each.
std::vector<Index> typiclust_select(const Eigen::Ref<const MatrixXd>& features, std::span<const Index> labeled,
                                    Index batch, Index k_nn, std::uint64_t seed);

}  // namespace fastfish

#endif  // FASTFISH_BASELINES_HPP_
