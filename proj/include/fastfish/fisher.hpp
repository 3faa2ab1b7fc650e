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

// Last-layer Fisher information for a softmax linear classifier.
//
// Parameters are the K x D weight matrix W, vectorized class-major: entry
// (j, d) lives at j * D + d. The log-likelihood gradient for class y is
// vec((e_y - p) h^T), so every per-instance Fisher matrix is kept as a
// (dim x rank) factor V with V V^T = I(x), never as a dense dim x dim block.

#ifndef FASTFISH_FISHER_HPP_
#define FASTFISH_FISHER_HPP_

#include "fastfish/common.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>

namespace fastfish {

namespace fim {
struct Exact {};
struct TopC {
  int c = 2;
};
struct Binary {};
struct Diagonal {};
struct Sampled {
  int samples = 1;
  std::uint64_t seed = 0;
};
}  // namespace fim

using FimKind = std::variant<fim::Exact, fim::TopC, fim::Binary, fim::Diagonal, fim::Sampled>;

/// "exact", "topc:2", "binary", "diag", "sampled:16".
std::string to_string(const FimKind& kind);
FimKind parse_fim_kind(std::string_view text);

/// Throws InvalidParameter when the kind's parameters are unusable for K classes.
void validate_kind(const FimKind& kind, Index classes);
/// Parameter dimension of the Fisher matrix: D for Binary, K * D otherwise.
Index fim_dimension(const FimKind& kind, Index features, Index classes);
/// Number of factor columns per instance (1 for Diagonal, which stores a vector).
Index fim_rank(const FimKind& kind, Index classes);

inline bool is_diagonal(const FimKind& kind) { return std::holds_alternative<fim::Diagonal>(kind); }

/// Probabilities are clamped to [floor, 1 - floor] inside every Fisher formula.
inline constexpr double kProbabilityFloor = 1e-12;

template <typename Scalar>
struct FimFactor {
  Matrix<Scalar> columns;

  Index dim() const { return columns.rows(); }
  Index rank() const { return columns.cols(); }

  Matrix<Scalar> materialize() const {
    Matrix<Scalar> out;
    materialize_into(out);
    return out;
  }

  /// V V^T into `out`, reusing its storage when the size already matches.
  void materialize_into(Matrix<Scalar>& out) const {
    out.resize(dim(), dim());
    out.template triangularView<Eigen::Lower>().setZero();
    out.template selfadjointView<Eigen::Lower>().rankUpdate(columns);
    out.template triangularView<Eigen::StrictlyUpper>() = out.transpose();
  }
};

/// Average Fisher matrix over a set of instances.
template <typename Scalar>
struct PoolFim {
  Matrix<Scalar> matrix;
  Index count = 0;
};

namespace detail {

template <typename Scalar>
Scalar clamp_probability(Scalar p) {
  const Scalar lo = Scalar(kProbabilityFloor);
  return std::clamp(p, lo, Scalar(1) - lo);
}

template <typename Scalar>
void check_probabilities(const Vector<Scalar>& p) {
  if (p.size() < 1) throw InvalidInput("probability vector is empty");
  Scalar sum = 0;
  for (Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p(i)) || p(i) < 0)
      throw InvalidInput("probability entry " + std::to_string(i) + " is negative or non-finite");
    sum += p(i);
  }
  if (std::abs(sum - Scalar(1)) > Scalar(1e-9))
    throw InvalidInput("probabilities sum to " + std::to_string(static_cast<double>(sum)));
}

template <typename Scalar>
void check_features(const Vector<Scalar>& h) {
  if (h.size() < 1) throw InvalidInput("feature vector is empty");
  if (!h.allFinite()) throw InvalidInput("feature vector has non-finite entries");
}

/// out = scale * vec((e_y - p) h^T), class-major.
template <typename Scalar, typename Out>
void write_gradient(const Vector<Scalar>& h, const Vector<Scalar>& p, Index y, Scalar scale,
                    Eigen::MatrixBase<Out>& out) {
  const Index d = h.size();
  for (Index j = 0; j < p.size(); ++j) {
    const Scalar coeff = scale * ((j == y ? Scalar(1) : Scalar(0)) - clamp_probability(p(j)));
    out.segment(j * d, d) = coeff * h;
  }
}

/// Class indices sorted by descending probability, ties by ascending index.
template <typename Scalar>
std::vector<Index> ranked_classes(const Vector<Scalar>& p, Index count) {
  std::vector<Index> order(static_cast<std::size_t>(p.size()));
  std::iota(order.begin(), order.end(), Index{0});
  const auto better = [&](Index a, Index b) { return p(a) > p(b) || (p(a) == p(b) && a < b); };
  std::partial_sort(order.begin(), order.begin() + count, order.end(), better);
  order.resize(static_cast<std::size_t>(count));
  return order;
}

template <typename Scalar>
Index argmax_class(const Vector<Scalar>& p) {
  Index best = 0;
  for (Index i = 1; i < p.size(); ++i)
    if (p(i) > p(best)) best = i;
  return best;
}

template <typename Derived>
Vector<typename Derived::Scalar> as_vector(const Eigen::MatrixBase<Derived>& v) {
  if (v.rows() != 1 && v.cols() != 1) throw InvalidInput("expected a vector");
  return v.derived().reshaped();
}

}  // namespace detail

/// Max-subtracted softmax.
template <typename Derived>
Vector<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> z = detail::as_vector(logits);
  if (z.size() < 2) throw InvalidInput("softmax needs at least two logits");
  if (!z.allFinite()) throw InvalidInput("softmax input has non-finite entries");
  z.array() -= z.maxCoeff();
  z = z.array().exp();
  return z / z.sum();
}

/// Gradient of ln p(y | h) with respect to vec(W); block j is (1[j=y] - p_j) h.
template <typename DerivedH, typename DerivedP>
Vector<typename DerivedH::Scalar> class_gradient(const Eigen::MatrixBase<DerivedH>& h,
                                                 const Eigen::MatrixBase<DerivedP>& p, Index y) {
  using Scalar = typename DerivedH::Scalar;
  const Vector<Scalar> hv = detail::as_vector(h);
  const Vector<Scalar> pv = detail::as_vector(p).template cast<Scalar>();
  detail::check_features(hv);
  detail::check_probabilities(pv);
  if (y < 0 || y >= pv.size())
    throw IndexError("class " + std::to_string(y) + " out of range for K=" + std::to_string(pv.size()));
  Vector<Scalar> g(hv.size() * pv.size());
  detail::write_gradient(hv, pv, y, Scalar(1), g);
  return g;
}

/// Full expectation over all K classes: columns sqrt(p_y) g_y.
template <typename DerivedH, typename DerivedP>
FimFactor<typename DerivedH::Scalar> fim_exact(const Eigen::MatrixBase<DerivedH>& h,
                                               const Eigen::MatrixBase<DerivedP>& p) {
  using Scalar = typename DerivedH::Scalar;
  const Vector<Scalar> hv = detail::as_vector(h);
  const Vector<Scalar> pv = detail::as_vector(p).template cast<Scalar>();
  detail::check_features(hv);
  detail::check_probabilities(pv);
  const Index k = pv.size();
  FimFactor<Scalar> f{Matrix<Scalar>(k * hv.size(), k)};
  for (Index y = 0; y < k; ++y) {
    auto col = f.columns.col(y);
    detail::write_gradient(hv, pv, y, std::sqrt(detail::clamp_probability(pv(y))), col);
  }
  return f;
}

/// Expectation restricted to the c most probable classes, renormalized over
/// them. The gradients themselves stay full K-class gradients.
template <typename DerivedH, typename DerivedP>
FimFactor<typename DerivedH::Scalar> fim_topc(const Eigen::MatrixBase<DerivedH>& h,
                                              const Eigen::MatrixBase<DerivedP>& p, int c) {
  using Scalar = typename DerivedH::Scalar;
  const Vector<Scalar> hv = detail::as_vector(h);
  const Vector<Scalar> pv = detail::as_vector(p).template cast<Scalar>();
  detail::check_features(hv);
  detail::check_probabilities(pv);
  if (c < 1 || c > pv.size())
    throw InvalidParameter("top-c needs 1 <= c <= K, got c=" + std::to_string(c));
  const auto top = detail::ranked_classes(pv, c);
  Scalar mass = 0;
  for (Index y : top) mass += detail::clamp_probability(pv(y));
  FimFactor<Scalar> f{Matrix<Scalar>(pv.size() * hv.size(), c)};
  for (Index j = 0; j < c; ++j) {
    const Index y = top[static_cast<std::size_t>(j)];
    auto col = f.columns.col(j);
    detail::write_gradient(hv, pv, y, std::sqrt(detail::clamp_probability(pv(y)) / mass), col);
  }
  return f;
}

/// Bernoulli surrogate on the top probability with a logit linear in h:
/// I(x) = p(1 - p) h h^T, rank one and independent of K.
template <typename DerivedH, typename DerivedP>
FimFactor<typename DerivedH::Scalar> fim_binary(const Eigen::MatrixBase<DerivedH>& h,
                                                const Eigen::MatrixBase<DerivedP>& p) {
  using Scalar = typename DerivedH::Scalar;
  const Vector<Scalar> hv = detail::as_vector(h);
  const Vector<Scalar> pv = detail::as_vector(p).template cast<Scalar>();
  detail::check_features(hv);
  detail::check_probabilities(pv);
  const Scalar top = detail::clamp_probability(pv.maxCoeff());
  return FimFactor<Scalar>{std::sqrt(top * (Scalar(1) - top)) * hv};
}

/// Diagonal of the exact Fisher matrix: entry j * D + d is p_j (1 - p_j) h_d^2.
template <typename DerivedH, typename DerivedP>
Vector<typename DerivedH::Scalar> fim_diagonal(const Eigen::MatrixBase<DerivedH>& h,
                                               const Eigen::MatrixBase<DerivedP>& p) {
  using Scalar = typename DerivedH::Scalar;
  const Vector<Scalar> hv = detail::as_vector(h);
  const Vector<Scalar> pv = detail::as_vector(p).template cast<Scalar>();
  detail::check_features(hv);
  detail::check_probabilities(pv);
  const Index d = hv.size();
  const Vector<Scalar> h2 = hv.array().square();
  Vector<Scalar> out(pv.size() * d);
  for (Index j = 0; j < pv.size(); ++j) {
    const Scalar pj = detail::clamp_probability(pv(j));
    out.segment(j * d, d) = (pj - pj * pj) * h2;
  }
  return out;
}

/// Monte-Carlo estimate with labels drawn from Cat(p); columns g_{y_j} / sqrt(s).
template <typename DerivedH, typename DerivedP>
FimFactor<typename DerivedH::Scalar> fim_sampled(const Eigen::MatrixBase<DerivedH>& h,
                                                 const Eigen::MatrixBase<DerivedP>& p, int samples,
                                                 std::uint64_t seed) {
  using Scalar = typename DerivedH::Scalar;
  const Vector<Scalar> hv = detail::as_vector(h);
  const Vector<Scalar> pv = detail::as_vector(p).template cast<Scalar>();
  detail::check_features(hv);
  detail::check_probabilities(pv);
  if (samples < 1) throw InvalidParameter("sampled Fisher needs at least one sample");
  std::mt19937_64 rng(seed);
  std::discrete_distribution<Index> draw(pv.data(), pv.data() + pv.size());
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(samples));
  FimFactor<Scalar> f{Matrix<Scalar>(pv.size() * hv.size(), samples)};
  for (int j = 0; j < samples; ++j) {
    auto col = f.columns.col(j);
    detail::write_gradient(hv, pv, draw(rng), scale, col);
  }
  return f;
}

/// Per-instance factor for any non-diagonal kind. Sampled kinds derive the
/// instance seed from the kind seed and `instance`.
template <typename DerivedH, typename DerivedP>
FimFactor<typename DerivedH::Scalar> fim_factor(const Eigen::MatrixBase<DerivedH>& h,
                                                const Eigen::MatrixBase<DerivedP>& p,
                                                const FimKind& kind, Index instance = 0) {
  using Result = FimFactor<typename DerivedH::Scalar>;
  return std::visit(
      [&](const auto& k) -> Result {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, fim::Exact>) {
          return fim_exact(h, p);
        } else if constexpr (std::is_same_v<K, fim::TopC>) {
          return fim_topc(h, p, k.c);
        } else if constexpr (std::is_same_v<K, fim::Binary>) {
          return fim_binary(h, p);
        } else if constexpr (std::is_same_v<K, fim::Sampled>) {
          return fim_sampled(h, p, k.samples, derive_seed(k.seed, static_cast<std::uint64_t>(instance)));
        } else {
          throw InvalidParameter("diagonal Fisher has no low-rank factor");
        }
      },
      kind);
}

/// Stacks the factors of the given rows side by side, each scaled by `scale`:
/// result is dim x (rows.size() * rank).
template <typename Scalar, typename DerivedF, typename DerivedP>
Matrix<Scalar> stack_factors(const Eigen::MatrixBase<DerivedF>& features,
                             const Eigen::MatrixBase<DerivedP>& probs, std::span<const Index> rows,
                             const FimKind& kind, Scalar scale = Scalar(1)) {
  const Index k = probs.cols();
  const Index dim = fim_dimension(kind, features.cols(), k);
  const Index rank = fim_rank(kind, k);
  Matrix<Scalar> out(dim, static_cast<Index>(rows.size()) * rank);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index n = rows[i];
    const Vector<Scalar> h = features.row(n).transpose().template cast<Scalar>();
    const Vector<Scalar> p = probs.row(n).transpose().template cast<Scalar>();
    out.middleCols(static_cast<Index>(i) * rank, rank) = scale * fim_factor(h, p, kind, n).columns;
  }
  return out;
}

/// Stacked diagonals, one column per row, each scaled by `scale`.
template <typename Scalar, typename DerivedF, typename DerivedP>
Matrix<Scalar> stack_diagonals(const Eigen::MatrixBase<DerivedF>& features,
                               const Eigen::MatrixBase<DerivedP>& probs, std::span<const Index> rows,
                               Scalar scale = Scalar(1)) {
  Matrix<Scalar> out(features.cols() * probs.cols(), static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index n = rows[i];
    const Vector<Scalar> h = features.row(n).transpose().template cast<Scalar>();
    const Vector<Scalar> p = probs.row(n).transpose().template cast<Scalar>();
    out.col(static_cast<Index>(i)) = scale * fim_diagonal(h, p);
  }
  return out;
}

/// Average Fisher matrix over all rows. Instances are reduced in fixed chunks
/// combined pairwise, so the result is independent of thread count. For the
/// Diagonal kind the averaged diagonal is embedded in a dense matrix.
template <typename DerivedF, typename DerivedP>
PoolFim<typename DerivedF::Scalar> pool_fim(const Eigen::MatrixBase<DerivedF>& features,
                                            const Eigen::MatrixBase<DerivedP>& probs,
                                            const FimKind& kind) {
  using Scalar = typename DerivedF::Scalar;
  const Index n = features.rows();
  if (n == 0) throw EmptyPool("pool Fisher over zero instances");
  if (probs.rows() != n) throw InvalidInput("features and probabilities disagree on instance count");
  validate_kind(kind, probs.cols());
  const Index dim = fim_dimension(kind, features.cols(), probs.cols());
  const bool diagonal = is_diagonal(kind);

  constexpr Index kChunk = 64;
  const Index chunks = (n + kChunk - 1) / kChunk;
  std::vector<Matrix<Scalar>> partial(static_cast<std::size_t>(chunks));
  parallel_for(chunks, [&](Index c) {
    const Index begin = c * kChunk;
    const Index end = std::min(n, begin + kChunk);
    std::vector<Index> rows(static_cast<std::size_t>(end - begin));
    std::iota(rows.begin(), rows.end(), begin);
    auto& out = partial[static_cast<std::size_t>(c)];
    if (diagonal) {
      out = stack_diagonals<Scalar>(features, probs, rows).rowwise().sum();
    } else {
      const Matrix<Scalar> v = stack_factors<Scalar>(features, probs, rows, kind);
      out = Matrix<Scalar>::Zero(dim, dim);
      out.template selfadjointView<Eigen::Lower>().rankUpdate(v);
    }
  });
  for (std::size_t width = 1; width < partial.size(); width *= 2)
    for (std::size_t i = 0; i + width < partial.size(); i += 2 * width) partial[i] += partial[i + width];

  PoolFim<Scalar> result;
  result.count = n;
  if (diagonal) {
    result.matrix = (partial.front() / static_cast<Scalar>(n)).asDiagonal();
  } else {
    partial.front() /= static_cast<Scalar>(n);
    result.matrix = partial.front().template selfadjointView<Eigen::Lower>();
  }
  return result;
}

}  // namespace fastfish

#endif  // FASTFISH_FISHER_HPP_
