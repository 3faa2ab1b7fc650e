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

#include "fastfish/synthetic.hpp"

#include "json.hpp"

#include <Eigen/QR>

#include <numeric>
#include <random>

namespace fastfish {

EmbeddingDataset gen_synthetic(Index n, Index d, int k, double separation, double label_noise,
                               std::uint64_t seed) {
  if (k < 2) throw InvalidParameter("synthetic data needs k >= 2");
  if (d < 1) throw InvalidParameter("synthetic data needs d >= 1");
  if (n < k) throw InvalidParameter("synthetic data needs n >= k");
  if (!(label_noise >= 0 && label_noise <= 1)) throw InvalidParameter("label_noise must lie in [0, 1]");
  if (!(separation >= 0)) throw InvalidParameter("separation must be non-negative");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  MatrixXd frame(d, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < d; ++i) frame(i, j) = normal(rng);
  if (k <= d) {
    const Eigen::HouseholderQR<MatrixXd> qr(frame);
    frame = qr.householderQ() * MatrixXd::Identity(d, k);
  } else {
    frame.colwise().normalize();
  }
  const MatrixXd means = separation * frame;

  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i % k);
  std::shuffle(labels.begin(), labels.end(), rng);

  EmbeddingDataset out;
  out.num_classes = k;
  out.features.resize(n, d);
  out.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    for (Index j = 0; j < d; ++j) out.features(i, j) = static_cast<float>(means(j, y) + normal(rng));
    int observed = y;
    if (uniform(rng) < label_noise) {
      const int shift = std::uniform_int_distribution<int>(1, k - 1)(rng);
      observed = (y + shift) % k;
    }
    out.labels[static_cast<std::size_t>(i)] = observed;
  }
  out.metadata = nlohmann::json{{"name", "synthetic"},
                                {"source", "gaussian-mixture"},
                                {"n", n},
                                {"d", d},
                                {"k", k},
                                {"separation", separation},
                                {"label_noise", label_noise},
                                {"seed", seed}}
                     .dump();
  return out;
}

std::pair<EmbeddingDataset, EmbeddingDataset> split_rows(const EmbeddingDataset& dataset, Index head) {
  if (head < 1 || head >= dataset.size()) throw InvalidParameter("split point must leave both parts nonempty");
  std::vector<Index> a(static_cast<std::size_t>(head)), b(static_cast<std::size_t>(dataset.size() - head));
  std::iota(a.begin(), a.end(), Index{0});
  std::iota(b.begin(), b.end(), head);
  return {take_rows(dataset, a), take_rows(dataset, b)};
}

}  // namespace fastfish
