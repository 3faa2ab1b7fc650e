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

#include "fastfish/classifier.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace fastfish {

namespace {

void check_labels(std::span<const int> labels, Index rows, Index classes) {
  if (static_cast<Index>(labels.size()) != rows) throw InvalidInput("label count does not match feature rows");
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0 || labels[i] >= classes)
      throw IndexError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) + " out of range");
}

MatrixXd logits(const ClassifierParams& params, const Eigen::Ref<const MatrixXd>& features) {
  MatrixXd z = features * params.weights.transpose();
  z.rowwise() += params.bias.transpose();
  return z;
}

// Rectified Adam state for one parameter block.
struct Moments {
  MatrixXd m, v;
};

void radam_step(MatrixXd& param, const MatrixXd& grad, Moments& s, const TrainConfig& c, double lr, long step) {
  s.m = c.beta1 * s.m + (1 - c.beta1) * grad;
  s.v = c.beta2 * s.v + (1 - c.beta2) * grad.cwiseAbs2();
  const double b1t = std::pow(c.beta1, static_cast<double>(step));
  const double b2t = std::pow(c.beta2, static_cast<double>(step));
  const double rho_inf = 2.0 / (1.0 - c.beta2) - 1.0;
  const double rho = rho_inf - 2.0 * static_cast<double>(step) * b2t / (1.0 - b2t);
  const double step_size = lr / (1.0 - b1t);
  if (rho > 5.0) {
    const double r = std::sqrt((rho - 4) * (rho - 2) * rho_inf / ((rho_inf - 4) * (rho_inf - 2) * rho));
    const double bias2 = std::sqrt(1.0 - b2t);
    param.array() -= step_size * r * s.m.array() / (s.v.array().sqrt() / bias2 + c.epsilon);
  } else {
    param -= step_size * s.m;
  }
}

}  // namespace

void validate(const TrainConfig& config) {
  if (config.epochs < 1) throw InvalidParameter("epochs must be >= 1");
  if (config.batch_size < 1) throw InvalidParameter("batch_size must be >= 1");
  if (!(config.learning_rate > 0)) throw InvalidParameter("learning_rate must be positive");
  if (!(config.weight_decay >= 0)) throw InvalidParameter("weight_decay must be non-negative");
}

LossAndGrad loss_and_grad(const ClassifierParams& params, const Eigen::Ref<const MatrixXd>& features,
                          std::span<const int> labels, double weight_decay) {
  const Index n = features.rows();
  if (n == 0) throw InvalidInput("empty batch");
  if (features.cols() != params.features()) throw InvalidInput("feature width does not match weights");
  check_labels(labels, n, params.classes());

  MatrixXd z = logits(params, features);
  double nll = 0;
  for (Index i = 0; i < n; ++i) {
    const double mx = z.row(i).maxCoeff();
    z.row(i).array() -= mx;
    const double lse = std::log(z.row(i).array().exp().sum());
    nll += lse - z(i, labels[static_cast<std::size_t>(i)]);
    z.row(i) = (z.row(i).array() - lse).exp();  // probabilities
    z(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  LossAndGrad out;
  out.loss = nll * inv_n + 0.5 * weight_decay * params.weights.squaredNorm();
  out.gradient.weights = inv_n * (z.transpose() * features) + weight_decay * params.weights;
  out.gradient.bias = inv_n * z.colwise().sum().transpose();
  return out;
}

MatrixXd predict_proba(const ClassifierParams& params, const Eigen::Ref<const MatrixXd>& features) {
  if (features.cols() != params.features()) throw InvalidInput("feature width does not match weights");
  MatrixXd z = logits(params, features);
  for (Index i = 0; i < z.rows(); ++i) {
    z.row(i).array() -= z.row(i).maxCoeff();
    z.row(i) = z.row(i).array().exp();
    z.row(i) /= z.row(i).sum();
  }
  return z;
}

std::vector<int> predict(const ClassifierParams& params, const Eigen::Ref<const MatrixXd>& features) {
  const MatrixXd z = logits(params, features);
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Index i = 0; i < z.rows(); ++i) {
    Index best = 0;
    for (Index k = 1; k < z.cols(); ++k)
      if (z(i, k) > z(i, best)) best = k;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double evaluate(const ClassifierParams& params, const Eigen::Ref<const MatrixXd>& features,
                std::span<const int> labels) {
  if (features.rows() == 0) throw InvalidInput("empty test set");
  check_labels(labels, features.rows(), params.classes());
  const auto pred = predict(params, features);
  Index correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

ClassifierParams init_params(Index classes, Index features, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.01);
  ClassifierParams p{MatrixXd(classes, features), VectorXd::Zero(classes)};
  for (Index j = 0; j < features; ++j)
    for (Index k = 0; k < classes; ++k) p.weights(k, j) = normal(rng);
  return p;
}

ClassifierParams train(const Eigen::Ref<const MatrixXd>& features, std::span<const int> labels, Index classes,
                       const TrainConfig& config, std::vector<double>* epoch_loss) {
  validate(config);
  const Index n = features.rows();
  if (n == 0) throw InvalidInput("cannot train on an empty labeled set");
  if (classes < 1) throw InvalidInput("need at least one class");
  check_labels(labels, n, classes);

  ClassifierParams params = init_params(classes, features.cols(), derive_seed(config.seed, 0x1417));
  Moments mw{MatrixXd::Zero(classes, features.cols()), MatrixXd::Zero(classes, features.cols())};
  Moments mb{MatrixXd::Zero(classes, 1), MatrixXd::Zero(classes, 1)};
  std::mt19937_64 rng(derive_seed(config.seed, 0x54f));
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});

  const Index batch = std::min<Index>(config.batch_size, n);
  MatrixXd xb(batch, features.cols());
  std::vector<int> yb(static_cast<std::size_t>(batch));
  long step = 0;
  if (epoch_loss) epoch_loss->clear();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double lr = config.learning_rate;
    if (config.schedule == LrSchedule::CosineAnnealing)
      lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * epoch / config.epochs));
    std::shuffle(order.begin(), order.end(), rng);
    for (Index begin = 0; begin < n; begin += batch) {
      const Index count = std::min(batch, n - begin);
      xb.conservativeResize(count, Eigen::NoChange);
      yb.resize(static_cast<std::size_t>(count));
      for (Index i = 0; i < count; ++i) {
        const Index row = order[static_cast<std::size_t>(begin + i)];
        xb.row(i) = features.row(row);
        yb[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(row)];
      }
      const LossAndGrad lg = loss_and_grad(params, xb, yb, config.weight_decay);
      if (!std::isfinite(lg.loss))
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", step " + std::to_string(step) +
                            " (lr " + std::to_string(lr) + ")");
      ++step;
      radam_step(params.weights, lg.gradient.weights, mw, config, lr, step);
      MatrixXd bias = params.bias;
      radam_step(bias, lg.gradient.bias, mb, config, lr, step);
      params.bias = bias;
    }
    if (epoch_loss) epoch_loss->push_back(loss_and_grad(params, features, labels, config.weight_decay).loss);
  }
  return params;
}

}  // namespace fastfish
