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

#include "fastfish/fisher.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

namespace ff = fastfish;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double min_eig(const MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace

TEST(Softmax, Examples) {
  EXPECT_NEAR(ff::softmax(vec({0, 0}))(0), 0.5, 1e-15);
  const VectorXd p = ff::softmax(vec({std::log(2.0), 0}));
  EXPECT_NEAR(p(0), 2.0 / 3, 1e-15);
  EXPECT_NEAR(p(1), 1.0 / 3, 1e-15);
  const VectorXd s = ff::softmax(vec({1000, 0}));
  EXPECT_NEAR(s(0), 1.0, 1e-12);
  EXPECT_NEAR(s(1), 0.0, 1e-12);
  EXPECT_TRUE(s.allFinite());
}

TEST(ClassGradient, Examples) {
  const VectorXd g = ff::class_gradient(vec({1}), vec({0.5, 0.5}), 0);
  EXPECT_NEAR(g(0), 0.5, 1e-15);
  EXPECT_NEAR(g(1), -0.5, 1e-15);
  EXPECT_EQ(ff::class_gradient(vec({0, 0, 0}), vec({0.2, 0.8}), 1).norm(), 0.0);
  const VectorXd g2 = ff::class_gradient(vec({1, 2}), vec({0.8, 0.2}), 1);
  EXPECT_LT((g2 - vec({-0.8, -1.6, 0.8, 1.6})).norm(), 1e-12);
  EXPECT_THROW(ff::class_gradient(vec({1}), vec({0.5, 0.5}), 2), ff::IndexError);
  EXPECT_THROW(ff::class_gradient(vec({1}), vec({0.5, 0.6}), 0), ff::InvalidInput);
}

TEST(ClassGradient, MatchesFiniteDifferenceOfLogSoftmax) {
  std::mt19937_64 rng(3);
  const int k = 4, d = 3;
  MatrixXd w = MatrixXd::Random(k, d);
  const VectorXd h = oracle::random_vector(d, rng);
  const VectorXd p = ff::softmax(w * h);
  for (int y = 0; y < k; ++y) {
    const VectorXd g = ff::class_gradient(h, p, y);
    for (int j = 0; j < k; ++j)
      for (int t = 0; t < d; ++t) {
        const double eps = 1e-6;
        MatrixXd wp = w, wm = w;
        wp(j, t) += eps;
        wm(j, t) -= eps;
        const double fd = (std::log(ff::softmax(wp * h)(y)) - std::log(ff::softmax(wm * h)(y))) / (2 * eps);
        EXPECT_NEAR(g(j * d + t), fd, 1e-7);
      }
  }
}

TEST(FimExact, Examples) {
  EXPECT_EQ(ff::fim_exact(vec({1}), vec({1, 0})).materialize().cwiseAbs().maxCoeff() < 1e-11, true);
  MatrixXd want(2, 2);
  want << 0.25, -0.25, -0.25, 0.25;
  EXPECT_LT(oracle::max_abs(ff::fim_exact(vec({1}), vec({0.5, 0.5})).materialize() - want), 1e-15);
}

TEST(FimExact, MatchesBruteForceAndKronecker) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dd(1, 8), kk(2, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = dd(rng), k = kk(rng);
    const VectorXd h = oracle::random_vector(d, rng);
    const VectorXd p = oracle::random_probs(k, rng);
    const MatrixXd f = ff::fim_exact(h, p).materialize();
    EXPECT_LT(oracle::max_abs(f - oracle::exact_fim(h, p)), 1e-10);
    EXPECT_LT(oracle::max_abs(f - oracle::kronecker_fim(h, p)), 1e-10);
    EXPECT_EQ(ff::fim_exact(h, p).rank(), k);
  }
}

TEST(FimTopC, Examples) {
  MatrixXd want(2, 2);
  want << 0.04, -0.04, -0.04, 0.04;
  EXPECT_LT(oracle::max_abs(ff::fim_topc(vec({1}), vec({0.8, 0.2}), 1).materialize() - want), 1e-12);
  // uniform p with c=1: the factor is the gradient of class 0
  const VectorXd p = VectorXd::Constant(3, 1.0 / 3);
  const auto f = ff::fim_topc(vec({1, 2}), p, 1);
  EXPECT_LT((f.columns.col(0) - ff::class_gradient(vec({1, 2}), p, 0)).norm(), 1e-12);
  EXPECT_THROW(ff::fim_topc(vec({1}), vec({0.5, 0.5}), 3), ff::InvalidParameter);
  EXPECT_THROW(ff::fim_topc(vec({1}), vec({0.5, 0.5}), 0), ff::InvalidParameter);
}

TEST(FimTopC, FullCRecoversExactAndMatchesOracle) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> dd(1, 8), kk(2, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = dd(rng), k = kk(rng);
    const VectorXd h = oracle::random_vector(d, rng);
    const VectorXd p = oracle::random_probs(k, rng);
    EXPECT_LT(oracle::max_abs(ff::fim_topc(h, p, k).materialize() - ff::fim_exact(h, p).materialize()), 1e-10);
    for (int c = 1; c <= k; ++c)
      EXPECT_LT(oracle::max_abs(ff::fim_topc(h, p, c).materialize() - oracle::topc_fim(h, p, c)), 1e-10);
  }
}

TEST(FimTopC, RenormalizedWeightsSumToOne) {
  // sum_j ||col_j||^2 / ||g_{y_j}||^2 recovers the weights, which must sum to 1
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 5;
    const VectorXd h = oracle::random_vector(3, rng);
    const VectorXd p = oracle::random_probs(k, rng);
    const auto f = ff::fim_topc(h, p, 3);
    std::vector<int> order = {0, 1, 2, 3, 4};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p(a) > p(b); });
    double total = 0;
    for (int j = 0; j < 3; ++j) {
      const VectorXd g = oracle::gradient(h, p, order[static_cast<std::size_t>(j)]);
      total += f.columns.col(j).squaredNorm() / g.squaredNorm();
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(FimBinary, Examples) {
  EXPECT_NEAR(ff::fim_binary(vec({2}), vec({0.5, 0.5})).materialize()(0, 0), 1.0, 1e-15);
  MatrixXd want = MatrixXd::Zero(2, 2);
  want(0, 0) = 0.16;
  EXPECT_LT(oracle::max_abs(ff::fim_binary(vec({1, 0}), vec({0.8, 0.2})).materialize() - want), 1e-15);
  EXPECT_LT(oracle::max_abs(ff::fim_binary(vec({1, 3}), vec({0, 1, 0})).materialize()), 1e-11);
}

TEST(FimBinary, RankAndTrace) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const VectorXd h = oracle::random_vector(6, rng);
    const VectorXd p = oracle::random_probs(5, rng);
    const auto f = ff::fim_binary(h, p);
    EXPECT_EQ(f.rank(), 1);
    const MatrixXd m = f.materialize();
    Eigen::JacobiSVD<MatrixXd> svd(m);
    const VectorXd sv = svd.singularValues();
    EXPECT_LE((sv.array() > 1e-12 * std::max(1.0, sv(0))).count(), 1);
    const double q = p.maxCoeff();
    EXPECT_NEAR(m.trace(), q * (1 - q) * h.squaredNorm(), 1e-12);
    EXPECT_LT(oracle::max_abs(m - oracle::binary_fim(h, p)), 1e-12);
  }
}

TEST(FimDiagonal, Examples) {
  const VectorXd v = ff::fim_diagonal(vec({1}), vec({0.5, 0.5}));
  EXPECT_NEAR(v(0), 0.25, 1e-15);
  EXPECT_NEAR(v(1), 0.25, 1e-15);
  EXPECT_EQ(ff::fim_diagonal(vec({0, 0}), vec({0.3, 0.7})).norm(), 0.0);
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const VectorXd h = oracle::random_vector(4, rng);
    const VectorXd p = oracle::random_probs(3, rng);
    EXPECT_LT((ff::fim_diagonal(h, p) - oracle::diagonal_fim(h, p)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(FimSampled, OneHotAndDeterminism) {
  EXPECT_LT(oracle::max_abs(ff::fim_sampled(vec({1, 2}), vec({0, 1}), 7, 3).materialize()), 1e-11);
  const VectorXd h = vec({0.3, -1.2});
  const VectorXd p = vec({0.2, 0.5, 0.3});
  EXPECT_EQ(ff::fim_sampled(h, p, 10, 42).columns, ff::fim_sampled(h, p, 10, 42).columns);
  EXPECT_EQ(ff::fim_sampled(h, p, 10, 42).rank(), 10);
}

TEST(FimSampled, UnbiasedWithinThreeStandardErrors) {
  std::mt19937_64 rng(16);
  const VectorXd h = oracle::random_vector(3, rng);
  const VectorXd p = oracle::random_probs(4, rng);
  const int draws = 10000;
  const MatrixXd exact = oracle::exact_fim(h, p);
  MatrixXd sum = MatrixXd::Zero(exact.rows(), exact.cols());
  MatrixXd sq = sum;
  for (int s = 0; s < draws; ++s) {
    const MatrixXd m = ff::fim_sampled(h, p, 1, static_cast<std::uint64_t>(s) + 1000).materialize();
    sum += m;
    sq += m.cwiseProduct(m);
  }
  const MatrixXd mean = sum / draws;
  const MatrixXd var = (sq / draws - mean.cwiseProduct(mean)) * (double(draws) / (draws - 1));
  const MatrixXd se = (var / draws).cwiseSqrt();
  for (Eigen::Index i = 0; i < exact.rows(); ++i)
    for (Eigen::Index j = 0; j < exact.cols(); ++j)
      EXPECT_LE(std::abs(mean(i, j) - exact(i, j)), 3 * se(i, j) + 1e-12) << i << "," << j;
}

TEST(FimSampled, ErrorDecaysLikeInverseRoot) {
  std::mt19937_64 rng(17);
  const VectorXd h = oracle::random_vector(3, rng);
  const VectorXd p = oracle::random_probs(4, rng);
  const MatrixXd exact = oracle::exact_fim(h, p);
  const auto rms_error = [&](int s) {
    double total = 0;
    for (int rep = 0; rep < 40; ++rep)
      total += (ff::fim_sampled(h, p, s, 9000 + rep).materialize() - exact).squaredNorm();
    return std::sqrt(total / 40);
  };
  const double e100 = rms_error(100), e10000 = rms_error(10000);
  // 100x more samples: ~10x less error
  EXPECT_GT(e100 / e10000, 5.0);
  EXPECT_LT(e100 / e10000, 20.0);
}

TEST(FimProperties, PositiveSemidefiniteForAllKinds) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 50; ++trial) {
    const VectorXd h = oracle::random_vector(4, rng);
    const VectorXd p = oracle::random_probs(4, rng);
    for (const ff::FimKind& kind :
         {ff::FimKind{ff::fim::Exact{}}, ff::FimKind{ff::fim::TopC{2}}, ff::FimKind{ff::fim::Binary{}},
          ff::FimKind{ff::fim::Sampled{5, 1}}})
      EXPECT_GE(min_eig(ff::fim_factor(h, p, kind, trial).materialize()), -1e-8);
    EXPECT_GE(ff::fim_diagonal(h, p).minCoeff(), 0.0);
  }
}

TEST(FimProperties, AddingInformationNeverLowersEigenvalues) {
  std::mt19937_64 rng(19);
  MatrixXd acc = MatrixXd::Identity(12, 12);
  for (int trial = 0; trial < 30; ++trial) {
    const double before = min_eig(acc);
    acc += ff::fim_exact(oracle::random_vector(4, rng), oracle::random_probs(3, rng)).materialize();
    EXPECT_GE(min_eig(acc), before - 1e-8);
  }
}

TEST(PoolFim, Examples) {
  std::mt19937_64 rng(20);
  MatrixXd x(3, 2), p(3, 3);
  for (int i = 0; i < 3; ++i) {
    x.row(i) = oracle::random_vector(2, rng).transpose();
    p.row(i) = oracle::random_probs(3, rng).transpose();
  }
  MatrixXd want = MatrixXd::Zero(6, 6);
  for (int i = 0; i < 3; ++i) want += oracle::exact_fim(x.row(i).transpose(), p.row(i).transpose());
  want /= 3;
  EXPECT_LT(oracle::max_abs(ff::pool_fim(x, p, ff::fim::Exact{}).matrix - want), 1e-10);

  const MatrixXd one = ff::pool_fim(x.topRows(1), p.topRows(1), ff::fim::Exact{}).matrix;
  EXPECT_LT(oracle::max_abs(one - oracle::exact_fim(x.row(0).transpose(), p.row(0).transpose())), 1e-12);
  MatrixXd x2(2, 2), p2(2, 3);
  x2 << x.row(0), x.row(0);
  p2 << p.row(0), p.row(0);
  EXPECT_LT(oracle::max_abs(ff::pool_fim(x2, p2, ff::fim::Exact{}).matrix - one), 1e-12);
  EXPECT_THROW(ff::pool_fim(MatrixXd(0, 2), MatrixXd(0, 3), ff::fim::Exact{}), ff::EmptyPool);
}

TEST(PoolFim, IndependentOfThreadCount) {
  std::mt19937_64 rng(21);
  const int n = 300;
  MatrixXd x(n, 3), p(n, 4);
  for (int i = 0; i < n; ++i) {
    x.row(i) = oracle::random_vector(3, rng).transpose();
    p.row(i) = oracle::random_probs(4, rng).transpose();
  }
  for (const ff::FimKind& kind : {ff::FimKind{ff::fim::TopC{2}}, ff::FimKind{ff::fim::Diagonal{}}}) {
    ff::set_thread_count(1);
    const MatrixXd serial = ff::pool_fim(x, p, kind).matrix;
    ff::set_thread_count(4);
    const MatrixXd threaded = ff::pool_fim(x, p, kind).matrix;
    ff::set_thread_count(0);
    EXPECT_EQ(serial, threaded);
    MatrixXd want = MatrixXd::Zero(serial.rows(), serial.cols());
    for (int i = 0; i < n; ++i) {
      const VectorXd h = x.row(i).transpose(), pi = p.row(i).transpose();
      want += std::holds_alternative<ff::fim::Diagonal>(kind) ? oracle::fim(oracle::Kind::Diagonal, h, pi)
                                                              : oracle::topc_fim(h, pi, 2);
    }
    EXPECT_LT(oracle::max_abs(serial - want / n), 1e-12);
  }
}

TEST(FimKind, ParseAndPrint) {
  EXPECT_EQ(ff::to_string(ff::parse_fim_kind("topc")), "topc:2");
  EXPECT_EQ(ff::to_string(ff::parse_fim_kind("topc:3")), "topc:3");
  EXPECT_EQ(ff::to_string(ff::parse_fim_kind("diagonal")), "diag");
  EXPECT_EQ(ff::to_string(ff::parse_fim_kind("sampled:8")), "sampled:8");
  EXPECT_THROW(ff::parse_fim_kind("bogus"), ff::InvalidParameter);
  EXPECT_EQ(ff::fim_dimension(ff::fim::Binary{}, 64, 10), 64);
  EXPECT_EQ(ff::fim_dimension(ff::fim::Exact{}, 64, 10), 640);
  EXPECT_EQ(ff::fim_rank(ff::fim::TopC{3}, 10), 3);
  EXPECT_THROW(ff::validate_kind(ff::fim::TopC{5}, 4), ff::InvalidParameter);
}
