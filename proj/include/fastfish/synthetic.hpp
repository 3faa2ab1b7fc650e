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

#ifndef FASTFISH_SYNTHETIC_HPP_
#define FASTFISH_SYNTHETIC_HPP_

#include "fastfish/dataset.hpp"

#include <utility>

namespace fastfish {

/// Balanced Gaussian mixture: class means are `separation` times the columns
/// of a seeded random orthonormal frame (random unit vectors when k > d),
/// unit isotropic noise, and labels flipped to a uniformly chosen other class
/// with probability `label_noise`.
EmbeddingDataset gen_synthetic(Index n, Index d, int k, double separation, double label_noise, std::uint64_t seed);

/// First `head` rows and the rest.
std::pair<EmbeddingDataset, EmbeddingDataset> split_rows(const EmbeddingDataset& dataset, Index head);

}  // namespace fastfish

#endif  // FASTFISH_SYNTHETIC_HPP_
