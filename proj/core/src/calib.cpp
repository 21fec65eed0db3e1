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
#include "qronos/calib.hpp"

#include <algorithm>
#include <numeric>

#include "qronos/error.hpp"

namespace qronos {

CalibStats CalibStats::zeros(std::size_t dim) { return {Matrix(dim, dim), Matrix(dim, dim), 0, dim}; }

void accumulate(CalibStats& stats, const Matrix& x_batch, const Matrix& xt_batch) {
  if (x_batch.rows() != xt_batch.rows() || x_batch.cols() != xt_batch.cols())
    throw ShapeError("accumulate: X batch is " + std::to_string(x_batch.rows()) + "x" +
                     std::to_string(x_batch.cols()) + " but X~ batch is " +
                     std::to_string(xt_batch.rows()) + "x" + std::to_string(xt_batch.cols()));
  if (x_batch.cols() != stats.dim)
    throw ShapeError("accumulate: batch has " + std::to_string(x_batch.cols()) +
                     " features, statistics expect " + std::to_string(stats.dim));
  const std::size_t n = stats.dim;
  for (std::size_t r = 0; r < x_batch.rows(); ++r) {
    auto xr = x_batch.row(r);
    auto xtr = xt_batch.row(r);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = xtr[i];
      if (a == 0.0) continue;
      auto hrow = stats.H.row(i);
      auto grow = stats.G.row(i);
      for (std::size_t j = 0; j < n; ++j) {
        hrow[j] += a * xtr[j];
        grow[j] += a * xr[j];
      }
    }
  }
  stats.n_samples += x_batch.rows();
}

void accumulate_hessian(CalibStats& stats, const Matrix& xt_batch) {
  if (xt_batch.cols() != stats.dim)
    throw ShapeError("accumulate: batch has " + std::to_string(xt_batch.cols()) +
                     " features, statistics expect " + std::to_string(stats.dim));
  const std::size_t n = stats.dim;
  for (std::size_t r = 0; r < xt_batch.rows(); ++r) {
    auto xtr = xt_batch.row(r);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = xtr[i];
      if (a == 0.0) continue;
      auto hrow = stats.H.row(i);
      for (std::size_t j = 0; j < n; ++j) hrow[j] += a * xtr[j];
    }
  }
  stats.n_samples += xt_batch.rows();
}

CalibStats accumulate_all(const Matrix& x, const Matrix& xt, std::size_t batch_rows) {
  if (batch_rows == 0) throw UsageError("batch size must be positive");
  require_shape(xt, x.rows(), x.cols(), "X~ (must match X)");
  CalibStats stats = CalibStats::zeros(x.cols());
  for (std::size_t r0 = 0; r0 < x.rows(); r0 += batch_rows) {
    const std::size_t nr = std::min(batch_rows, x.rows() - r0);
    accumulate(stats, x.block(r0, 0, nr, x.cols()), xt.block(r0, 0, nr, xt.cols()));
  }
  return stats;
}

CalibStats merge(const CalibStats& a, const CalibStats& b) {
  if (a.dim != b.dim) throw ShapeError("merge: statistics dimensions differ");
  return {a.H + b.H, a.G + b.G, a.n_samples + b.n_samples, a.dim};
}

ColumnOrder ColumnOrder::identity(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  return from_perm(std::move(p));
}

ColumnOrder ColumnOrder::from_perm(std::vector<std::size_t> perm) {
  ColumnOrder o;
  o.inverse_perm.assign(perm.size(), perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] >= perm.size() || o.inverse_perm[perm[i]] != perm.size())
      throw ShapeError("not a permutation");
    o.inverse_perm[perm[i]] = i;
  }
  o.perm = std::move(perm);
  return o;
}

ColumnOrder order_by_diag(const Matrix& h) {
  if (h.rows() != h.cols()) throw ShapeError("order_by_diag: matrix is not square");
  std::vector<std::size_t> p(h.rows());
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::stable_sort(p.begin(), p.end(), [&](std::size_t a, std::size_t b) { return h(a, a) > h(b, b); });
  return ColumnOrder::from_perm(std::move(p));
}

Matrix permute_symmetric(const Matrix& m, const ColumnOrder& order) {
  const std::size_t n = order.perm.size();
  require_shape(m, n, n, "permute_symmetric");
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = m(order.perm[i], order.perm[j]);
  return out;
}

CalibStats permute_stats(const CalibStats& stats, const ColumnOrder& order) {
  return {permute_symmetric(stats.H, order), permute_symmetric(stats.G, order), stats.n_samples,
          stats.dim};
}

Matrix permute_weights(const Matrix& w, const ColumnOrder& order) {
  if (w.rows() != order.perm.size()) throw ShapeError("permute_weights: row count mismatch");
  Matrix out(w.rows(), w.cols());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    auto src = w.row(order.perm[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix unpermute_result(const Matrix& q, const ColumnOrder& order) {
  if (q.rows() != order.perm.size()) throw ShapeError("unpermute_result: row count mismatch");
  Matrix out(q.rows(), q.cols());
  for (std::size_t i = 0; i < q.rows(); ++i) {
    auto src = q.row(i);
    std::copy(src.begin(), src.end(), out.row(order.perm[i]).begin());
  }
  return out;
}

Matrix permute_columns(const Matrix& x, const ColumnOrder& order) {
  if (x.cols() != order.perm.size()) throw ShapeError("permute_columns: column count mismatch");
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t j = 0; j < x.cols(); ++j) out(r, j) = x(r, order.perm[j]);
  return out;
}

}  // namespace qronos
