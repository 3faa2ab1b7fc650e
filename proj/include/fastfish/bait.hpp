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

// Greedy batch acquisition minimizing tr((M + I(x))^-1 I_pool).
//
// All Fisher matrices entering M are weighted by 1 / (|labeled| + B), so at
// the end of a forward-only pass M is lambda I plus the average Fisher over
// the labeled pool and the batch.

#ifndef FASTFISH_BAIT_HPP_
#define FASTFISH_BAIT_HPP_

#include "fastfish/fisher.hpp"
#include "fastfish/woodbury.hpp"

#include <limits>
#include <random>
#include <span>
#include <unordered_set>
#include <vector>

namespace fastfish {

enum class GreedyMode { ForwardOnly, ForwardBackward };

struct AcquisitionRequest {
  Index batch_size = 1;
  /// Rows of the feature matrix eligible for selection (the unlabeled pool).
  std::vector<Index> candidates;
  GreedyMode mode = GreedyMode::ForwardBackward;
  /// Score at most this many (uniformly subsampled) candidates per step; 0 scores all.
  Index max_candidates = 0;
  std::uint64_t seed = 0;
};

template <typename Scalar>
struct BaitResult {
  /// Selected rows in selection order.
  std::vector<Index> indices;
  /// tr(M^-1 A) before the first step and after every forward/backward step.
  std::vector<Scalar> objective;
};

/// Scores many candidates against a fixed state. Candidate factors are given
/// stacked (dim x n*rank); products with M^-1 and M^-1 A M^-1 are formed in
/// fixed-size column chunks so results do not depend on thread count.
template <typename Scalar>
class CandidateScorer {
 public:
  CandidateScorer(const BaitState<Scalar>& state) : state_(state) {
    target_ = state.m_inverse * state.pool_target * state.m_inverse;
    target_ = Scalar(0.5) * (target_ + target_.transpose()).eval();
  }

  /// Gain (sign = +1) or removal cost (sign = -1) for each listed candidate.
  std::vector<Scalar> score(const Matrix<Scalar>& stacked, Index rank, std::span<const Index> which,
                            Scalar sign) const {
    std::vector<Scalar> out(which.size());
    constexpr Index kChunk = 128;
    const Index n = static_cast<Index>(which.size());
    const Index chunks = (n + kChunk - 1) / kChunk;
    parallel_for(chunks, [&](Index c) {
      const Index begin = c * kChunk;
      const Index count = std::min(n, begin + kChunk) - begin;
      Matrix<Scalar> v(stacked.rows(), count * rank);
      for (Index i = 0; i < count; ++i)
        v.middleCols(i * rank, rank) = stacked.middleCols(which[static_cast<std::size_t>(begin + i)] * rank, rank);
      const Matrix<Scalar> mv = state_.m_inverse * v;
      const Matrix<Scalar> tv = target_ * v;
      for (Index i = 0; i < count; ++i) {
        const auto vi = v.middleCols(i * rank, rank);
        Matrix<Scalar> s = sign * (vi.transpose() * mv.middleCols(i * rank, rank));
        s.diagonal().array() += Scalar(1);
        const Matrix<Scalar> h = vi.transpose() * tv.middleCols(i * rank, rank);
        out[static_cast<std::size_t>(begin + i)] = detail::capacitance_trace(s, h, "candidate score");
      }
    });
    return out;
  }

 private:
  const BaitState<Scalar>& state_;
  Matrix<Scalar> target_;
};

namespace detail {

inline void validate_request(Index pool_rows, std::span<const Index> labeled, const AcquisitionRequest& request) {
  if (request.batch_size < 1) throw InvalidRequest("batch size must be >= 1");
  if (request.candidates.empty()) throw EmptyPool("no unlabeled candidates");
  if (request.batch_size > static_cast<Index>(request.candidates.size()))
    throw InvalidRequest("batch size " + std::to_string(request.batch_size) + " exceeds " +
                         std::to_string(request.candidates.size()) + " candidates");
  std::unordered_set<Index> seen(labeled.begin(), labeled.end());
  for (Index i : labeled)
    if (i < 0 || i >= pool_rows) throw IndexError("labeled index " + std::to_string(i) + " out of range");
  for (Index i : request.candidates) {
    if (i < 0 || i >= pool_rows) throw IndexError("candidate index " + std::to_string(i) + " out of range");
    if (!seen.insert(i).second) throw InvalidRequest("candidate " + std::to_string(i) + " is duplicated or labeled");
  }
}

/// Positions (into `remaining`) to score this step.
inline std::vector<Index> step_positions(Index remaining, Index cap, std::uint64_t seed, Index step) {
  std::vector<Index> pos(static_cast<std::size_t>(remaining));
  std::iota(pos.begin(), pos.end(), Index{0});
  if (cap > 0 && cap < remaining) {
    std::mt19937_64 rng(derive_seed(seed, 0xca9d, static_cast<std::uint64_t>(step)));
    for (Index i = 0; i < cap; ++i) {
      std::uniform_int_distribution<Index> pick(i, remaining - 1);
      std::swap(pos[static_cast<std::size_t>(i)], pos[static_cast<std::size_t>(pick(rng))]);
    }
    pos.resize(static_cast<std::size_t>(cap));
    std::sort(pos.begin(), pos.end());
  }
  return pos;
}

/// Best position: maximal value (or minimal when `minimize`), ties to the smallest row.
template <typename Scalar>
std::size_t pick_best(const std::vector<Scalar>& values, std::span<const Index> rows, bool minimize) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const Scalar a = minimize ? -values[i] : values[i];
    const Scalar b = minimize ? -values[best] : values[best];
    if (a > b || (a == b && rows[i] < rows[best])) best = i;
  }
  return best;
}

template <typename Scalar>
Scalar diagonal_objective(const Vector<Scalar>& m, const Vector<Scalar>& a) {
  return (a.array() / m.array()).sum();
}

}  // namespace detail

/// Greedy selection over `features` (all rows form the pool: labeled and
/// unlabeled) with per-row class probabilities `probs`.
///
/// ForwardOnly runs B steps of argmax gain. ForwardBackward runs min(2B, |U|)
/// forward steps, then removes the instance whose removal least increases the
/// objective until B remain.
template <typename DerivedF, typename DerivedP>
BaitResult<double> bait_select(const Eigen::MatrixBase<DerivedF>& features, const Eigen::MatrixBase<DerivedP>& probs,
                               std::span<const Index> labeled, const AcquisitionRequest& request,
                               const FimKind& kind, double lambda) {
  using Scalar = double;
  const Index pool_rows = features.rows();
  if (probs.rows() != pool_rows) throw InvalidInput("features and probabilities disagree on instance count");
  if (std::holds_alternative<fim::Sampled>(kind))
    throw InvalidParameter("bait_select supports exact, topc, binary and diag Fisher kinds");
  if (!(lambda > 0)) throw InvalidParameter("lambda must be positive");
  validate_kind(kind, probs.cols());
  detail::validate_request(pool_rows, labeled, request);

  const Matrix<Scalar> x = features.template cast<Scalar>();
  const Matrix<Scalar> p = probs.template cast<Scalar>();
  const Index batch = request.batch_size;
  const Scalar weight = Scalar(1) / static_cast<Scalar>(static_cast<Index>(labeled.size()) + batch);
  const Index forward_steps = request.mode == GreedyMode::ForwardBackward
                                  ? std::min<Index>(2 * batch, static_cast<Index>(request.candidates.size()))
                                  : batch;
  const PoolFim<Scalar> target = pool_fim(x, p, kind);

  std::vector<Index> remaining = request.candidates;
  std::sort(remaining.begin(), remaining.end());
  BaitResult<Scalar> result;

  if (is_diagonal(kind)) {
    // Everything diagonal: gains are elementwise.
    const Vector<Scalar> a = target.matrix.diagonal();
    Vector<Scalar> m = Vector<Scalar>::Constant(a.size(), lambda);
    if (!labeled.empty()) m += stack_diagonals<Scalar>(x, p, labeled, weight).rowwise().sum();
    const Matrix<Scalar> f = stack_diagonals<Scalar>(x, p, request.candidates, weight);
    std::vector<Index> column_of(static_cast<std::size_t>(pool_rows), -1);
    for (std::size_t i = 0; i < request.candidates.size(); ++i)
      column_of[static_cast<std::size_t>(request.candidates[i])] = static_cast<Index>(i);

    result.objective.push_back(detail::diagonal_objective(m, a));
    for (Index step = 0; step < forward_steps; ++step) {
      const auto pos = detail::step_positions(static_cast<Index>(remaining.size()), request.max_candidates,
                                              request.seed, step);
      std::vector<Index> rows(pos.size());
      std::vector<Scalar> gains(pos.size());
      for (std::size_t i = 0; i < pos.size(); ++i) {
        rows[i] = remaining[static_cast<std::size_t>(pos[i])];
        const auto fi = f.col(column_of[static_cast<std::size_t>(rows[i])]).array();
        gains[i] = (a.array() * (m.array().inverse() - (m.array() + fi).inverse())).sum();
      }
      const std::size_t best = detail::pick_best(gains, rows, false);
      m += f.col(column_of[static_cast<std::size_t>(rows[best])]);
      result.indices.push_back(rows[best]);
      std::erase(remaining, rows[best]);
      result.objective.push_back(detail::diagonal_objective(m, a));
    }
    while (static_cast<Index>(result.indices.size()) > batch) {
      std::vector<Scalar> costs(result.indices.size());
      for (std::size_t i = 0; i < result.indices.size(); ++i) {
        const auto fi = f.col(column_of[static_cast<std::size_t>(result.indices[i])]).array();
        if (((m.array() - fi) <= 0).any()) throw NumericalError("diagonal downdate makes accumulator indefinite");
        costs[i] = (a.array() * ((m.array() - fi).inverse() - m.array().inverse())).sum();
      }
      const std::size_t worst = detail::pick_best(costs, result.indices, true);
      m -= f.col(column_of[static_cast<std::size_t>(result.indices[worst])]);
      result.indices.erase(result.indices.begin() + static_cast<std::ptrdiff_t>(worst));
      result.objective.push_back(detail::diagonal_objective(m, a));
    }
    return result;
  }

  const Index rank = fim_rank(kind, p.cols());
  const Scalar root_weight = std::sqrt(weight);
  const Matrix<Scalar> labeled_factor =
      labeled.empty() ? Matrix<Scalar>(target.matrix.rows(), 0) : stack_factors<Scalar>(x, p, labeled, kind, root_weight);
  BaitState<Scalar> state = make_bait_state(target.matrix, lambda, labeled_factor);
  // Candidate factors, indexed by position in request.candidates.
  const Matrix<Scalar> v = stack_factors<Scalar>(x, p, request.candidates, kind, root_weight);
  std::vector<Index> column_of(static_cast<std::size_t>(pool_rows), -1);
  for (std::size_t i = 0; i < request.candidates.size(); ++i)
    column_of[static_cast<std::size_t>(request.candidates[i])] = static_cast<Index>(i);
  const auto factor_of = [&](Index row) -> Matrix<Scalar> {
    return v.middleCols(column_of[static_cast<std::size_t>(row)] * rank, rank);
  };

  result.objective.push_back(state.objective());
  for (Index step = 0; step < forward_steps; ++step) {
    const auto pos = detail::step_positions(static_cast<Index>(remaining.size()), request.max_candidates,
                                            request.seed, step);
    std::vector<Index> rows(pos.size());
    std::vector<Index> cols(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) {
      rows[i] = remaining[static_cast<std::size_t>(pos[i])];
      cols[i] = column_of[static_cast<std::size_t>(rows[i])];
    }
    const auto gains = CandidateScorer<Scalar>(state).score(v, rank, cols, Scalar(1));
    const Index chosen = rows[detail::pick_best(gains, rows, false)];
    state = woodbury_update(std::move(state), factor_of(chosen), chosen);
    std::erase(remaining, chosen);
    result.objective.push_back(state.objective());
  }
  while (static_cast<Index>(state.selected.size()) > batch) {
    std::vector<Index> cols(state.selected.size());
    for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = column_of[static_cast<std::size_t>(state.selected[i])];
    const auto costs = CandidateScorer<Scalar>(state).score(v, rank, cols, Scalar(-1));
    const Index dropped = state.selected[detail::pick_best(costs, state.selected, true)];
    state = woodbury_downdate(std::move(state), factor_of(dropped), dropped);
    result.objective.push_back(state.objective());
  }
  result.indices = state.selected;
  return result;
}

}  // namespace fastfish

#endif  // FASTFISH_BAIT_HPP_
