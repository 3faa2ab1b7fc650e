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

#ifndef FASTFISH_CLASSIFIER_HPP_
#define FASTFISH_CLASSIFIER_HPP_

#include "fastfish/common.hpp"

#include <span>
#include <string>
#include <vector>

namespace fastfish {

enum class LrSchedule { Constant, CosineAnnealing };

/// Defaults follow the last-layer training protocol: RAdam, 200 epochs,
/// batch 128, lr 0.2, weight decay 1e-4, cosine annealing.
struct TrainConfig {
  int epochs = 200;
  int batch_size = 128;
  double learning_rate = 0.2;
  double weight_decay = 1e-4;
  LrSchedule schedule = LrSchedule::CosineAnnealing;
  std::uint64_t seed = 0;
  /// Informational; the only optimizer implemented is rectified Adam.
  std::string optimizer = "radam";
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

void validate(const TrainConfig& config);

/// Softmax linear layer: logits = W h + b.
struct ClassifierParams {
  MatrixXd weights;  // K x D
  VectorXd bias;     // K

  Index classes() const { return weights.rows(); }
  Index features() const { return weights.cols(); }
};

struct LossAndGrad {
  double loss = 0;
  ClassifierParams gradient;
};

/// Mean negative log-likelihood plus (weight_decay / 2) ||W||^2 and its
/// analytic gradient. Labels are 0-based.
LossAndGrad loss_and_grad(const ClassifierParams& params, const Eigen::Ref<const MatrixXd>& features,
                          std::span<const int> labels, double weight_decay);

/// N x K, row n = softmax(W h_n + b).
MatrixXd predict_proba(const ClassifierParams& params, const Eigen::Ref<const MatrixXd>& features);

/// Argmax per row, ties to the smallest class.
std::vector<int> predict(const ClassifierParams& params, const Eigen::Ref<const MatrixXd>& features);

double evaluate(const ClassifierParams& params, const Eigen::Ref<const MatrixXd>& features,
                std::span<const int> labels);

/// Gaussian(0, 0.01) weights, zero bias, seeded.
ClassifierParams init_params(Index classes, Index features, std::uint64_t seed);

/// Trains from a fresh initialization. When `epoch_loss` is given it receives
/// the full-data objective after every epoch.
ClassifierParams train(const Eigen::Ref<const MatrixXd>& features, std::span<const int> labels, Index classes,
                       const TrainConfig& config, std::vector<double>* epoch_loss = nullptr);

}  // namespace fastfish

#endif  // FASTFISH_CLASSIFIER_HPP_
