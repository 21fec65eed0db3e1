/*
 * Copyright (c) 2026 The Qronos PTQ Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstddef>
#include <vector>

#include "qronos/matrix.hpp"

namespace qronos {

/// Second-moment statistics of one layer's calibration inputs.
///   H = X~^T X~,  G = X~^T X  (G_ij = <X~_i, X_j>)
/// Accumulated batch by batch, so neither X nor X~ is ever held whole.
struct CalibStats {
  Matrix H;
  Matrix G;
  std::size_t n_samples = 0;
  std::size_t dim = 0;

  static CalibStats zeros(std::size_t dim);
};

/// H += X~^T X~, G += X~^T X over one batch (64-bit accumulation).
void accumulate(CalibStats& stats, const Matrix& x_batch, const Matrix& xt_batch);

/// H += X~^T X~ only; G is left untouched.
void accumulate_hessian(CalibStats& stats, const Matrix& xt_batch);

/// Accumulates (X, X~) in row batches of `batch_rows`.
CalibStats accumulate_all(const Matrix& x, const Matrix& xt, std::size_t batch_rows = 256);

/// Merge of independently accumulated statistics (matrix addition).
CalibStats merge(const CalibStats& a, const CalibStats& b);

/// Processing order of the input features. perm[i] is the original index of
/// the i-th processed column; inverse_perm undoes it.
struct ColumnOrder {
  std::vector<std::size_t> perm;
  std::vector<std::size_t> inverse_perm;

  static ColumnOrder identity(std::size_t n);
  static ColumnOrder from_perm(std::vector<std::size_t> perm);
};

/// Stable descending sort of diag(H).
ColumnOrder order_by_diag(const Matrix& h);

/// H' = P^T H P and G' likewise on both axes.
CalibStats permute_stats(const CalibStats& stats, const ColumnOrder& order);
Matrix permute_symmetric(const Matrix& m, const ColumnOrder& order);
/// Reorders weight rows (input features) into processing order.
Matrix permute_weights(const Matrix& w, const ColumnOrder& order);
/// Restores the original row order.
Matrix unpermute_result(const Matrix& q, const ColumnOrder& order);
/// Reorders the columns of an activation matrix (m x N) into processing order.
Matrix permute_columns(const Matrix& x, const ColumnOrder& order);

}  // namespace qronos
