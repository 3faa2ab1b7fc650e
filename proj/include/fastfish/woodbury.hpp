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

#ifndef FASTFISH_WOODBURY_HPP_
#define FASTFISH_WOODBURY_HPP_

#include "fastfish/fisher.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <string>
#include <vector>

namespace fastfish {

/// Inverse of the regularized selection accumulator (lambda I + M) together
/// with the pool target A. The objective being minimized is tr(M^-1 A).
template <typename Scalar>
struct BaitState {
  Matrix<Scalar> m_inverse;
  Matrix<Scalar> pool_target;
  Scalar lambda = Scalar(1);
  std::vector<Index> selected;

  Index dim() const { return m_inverse.rows(); }

  /// tr(M^-1 A) for symmetric operands.
  Scalar objective() const { return m_inverse.cwiseProduct(pool_target).sum(); }
};

/// M = lambda I + V V^T for a stacked accumulator factor V (dim x m, m may be 0).
template <typename Scalar>
BaitState<Scalar> make_bait_state(Matrix<Scalar> pool_target, Scalar lambda,
                                  const Matrix<Scalar>& accumulator_factor) {
  const Index dim = pool_target.rows();
  if (pool_target.cols() != dim) throw InvalidInput("pool target must be square");
  if (!(lambda > Scalar(0))) throw InvalidParameter("lambda must be positive");
  if (accumulator_factor.size() > 0 && accumulator_factor.rows() != dim)
    throw InvalidInput("accumulator factor dimension does not match pool target");

  Matrix<Scalar> m = lambda * Matrix<Scalar>::Identity(dim, dim);
  if (accumulator_factor.cols() > 0) m.template selfadjointView<Eigen::Lower>().rankUpdate(accumulator_factor);
  Eigen::LLT<Matrix<Scalar>> llt(m.template selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success) throw NumericalError("regularized accumulator is not positive definite");

  BaitState<Scalar> state;
  state.m_inverse = llt.solve(Matrix<Scalar>::Identity(dim, dim));
  state.m_inverse = Scalar(0.5) * (state.m_inverse + state.m_inverse.transpose()).eval();
  state.pool_target = std::move(pool_target);
  state.lambda = lambda;
  return state;
}

namespace detail {

template <typename Scalar>
void check_factor(const BaitState<Scalar>& state, const Matrix<Scalar>& v) {
  if (v.rows() != state.dim())
    throw InvalidInput("factor dimension " + std::to_string(v.rows()) + " does not match state dimension " +
                       std::to_string(state.dim()));
  if (v.cols() < 1) throw InvalidInput("factor must have rank >= 1");
}

/// Smallest eigenvalue, for diagnostics.
template <typename Scalar>
Scalar min_eigenvalue(const Matrix<Scalar>& s) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// tr(S^-1 H) for small symmetric S, with S = I + sign * V^T M^-1 V.
template <typename Scalar>
Scalar capacitance_trace(const Matrix<Scalar>& s, const Matrix<Scalar>& h, const char* what) {
  if (s.rows() == 1) {
    if (!(s(0, 0) > Scalar(0)))
      throw NumericalError(std::string(what) + ": capacitance " + std::to_string(double(s(0, 0))) +
                           " is not positive");
    return h(0, 0) / s(0, 0);
  }
  Eigen::LLT<Matrix<Scalar>> llt(s);
  if (llt.info() != Eigen::Success)
    throw NumericalError(std::string(what) + ": capacitance matrix not positive definite (min eigenvalue " +
                         std::to_string(double(min_eigenvalue(s))) + ")");
  return llt.solve(h).trace();
}

template <typename Scalar>
BaitState<Scalar> apply_low_rank(BaitState<Scalar> state, const Matrix<Scalar>& v, Scalar sign,
                                 const char* what) {
  const Matrix<Scalar> w = state.m_inverse * v;
  Matrix<Scalar> s = Matrix<Scalar>::Identity(v.cols(), v.cols()) + sign * (v.transpose() * w);
  Eigen::LLT<Matrix<Scalar>> llt(s);
  if (llt.info() != Eigen::Success)
    throw NumericalError(std::string(what) + ": accumulator would become indefinite (min eigenvalue of "
                         "capacitance " + std::to_string(double(min_eigenvalue(s))) + ")");
  // (M + sign V V^T)^-1 = M^-1 - sign W S^-1 W^T
  state.m_inverse.noalias() -= sign * (w * llt.solve(w.transpose()));
  state.m_inverse = Scalar(0.5) * (state.m_inverse + state.m_inverse.transpose()).eval();
  return state;
}

}  // namespace detail

/// tr(M^-1 A) - tr((M + V V^T)^-1 A), evaluated through the Woodbury identity
/// as tr(M^-1 V (I + V^T M^-1 V)^-1 V^T M^-1 A).
template <typename Scalar>
Scalar woodbury_gain(const BaitState<Scalar>& state, const Matrix<Scalar>& v) {
  detail::check_factor(state, v);
  const Matrix<Scalar> w = state.m_inverse * v;
  const Matrix<Scalar> s = Matrix<Scalar>::Identity(v.cols(), v.cols()) + v.transpose() * w;
  const Matrix<Scalar> h = w.transpose() * state.pool_target * w;
  return detail::capacitance_trace(s, h, "woodbury_gain");
}

template <typename Scalar>
Scalar woodbury_gain(const BaitState<Scalar>& state, const FimFactor<Scalar>& factor) {
  return woodbury_gain(state, factor.columns);
}

/// tr((M - V V^T)^-1 A) - tr(M^-1 A): the objective increase from removing V.
template <typename Scalar>
Scalar woodbury_removal_cost(const BaitState<Scalar>& state, const Matrix<Scalar>& v) {
  detail::check_factor(state, v);
  const Matrix<Scalar> w = state.m_inverse * v;
  const Matrix<Scalar> s = Matrix<Scalar>::Identity(v.cols(), v.cols()) - v.transpose() * w;
  const Matrix<Scalar> h = w.transpose() * state.pool_target * w;
  return detail::capacitance_trace(s, h, "woodbury_removal_cost");
}

/// M <- M + V V^T. `index` (if non-negative) is appended to the selection.
template <typename Scalar>
BaitState<Scalar> woodbury_update(BaitState<Scalar> state, const Matrix<Scalar>& v, Index index = -1) {
  detail::check_factor(state, v);
  state = detail::apply_low_rank(std::move(state), v, Scalar(1), "woodbury_update");
  if (index >= 0) state.selected.push_back(index);
  return state;
}

template <typename Scalar>
BaitState<Scalar> woodbury_update(BaitState<Scalar> state, const FimFactor<Scalar>& factor, Index index = -1) {
  return woodbury_update(std::move(state), factor.columns, index);
}

/// M <- M - V V^T. `index` (if present) is removed from the selection.
template <typename Scalar>
BaitState<Scalar> woodbury_downdate(BaitState<Scalar> state, const Matrix<Scalar>& v, Index index = -1) {
  detail::check_factor(state, v);
  state = detail::apply_low_rank(std::move(state), v, Scalar(-1), "woodbury_downdate");
  if (index >= 0) std::erase(state.selected, index);
  return state;
}

template <typename Scalar>
BaitState<Scalar> woodbury_downdate(BaitState<Scalar> state, const FimFactor<Scalar>& factor,
                                    Index index = -1) {
  return woodbury_downdate(std::move(state), factor.columns, index);
}

}  // namespace fastfish

#endif  // FASTFISH_WOODBURY_HPP_
