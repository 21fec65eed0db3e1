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
#include "qronos/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "qronos/error.hpp"

namespace qronos::oracle {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd to_eigen(const Matrix& m) {
  MatrixXd e(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      e(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
  return e;
}

Matrix from_eigen(const MatrixXd& e) {
  Matrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      m(r, c) = e(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  return m;
}

VectorXd to_eigen(std::span<const double> v) {
  VectorXd e(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) e(static_cast<Eigen::Index>(i)) = v[i];
  return e;
}

Vector from_eigen_vec(const VectorXd& e) { return Vector(e.data(), e.data() + e.size()); }

bool strictly_better(double candidate, double best) {
  return candidate < best - 1e-12 * std::max(1.0, std::abs(best));
}

// min over the alphabet of |r - p d|^2 / 2.
StepChoice enumerate_1d(const VectorXd& r, const VectorXd& d, const QuantGrid& grid) {
  StepChoice best{0.0, std::numeric_limits<double>::infinity()};
  for (int k = 0; k < grid.levels; ++k) {
    const double p = grid.value(k);
    const double obj = 0.5 * (r - p * d).squaredNorm();
    if (k == 0 || strictly_better(obj, best.objective)) best = {p, obj};
  }
  return best;
}

double nearest_alphabet_point(double v, const QuantGrid& grid) {
  double best = grid.value(0);
  double best_d = std::abs(v - best);
  for (int k = 1; k < grid.levels; ++k) {
    const double p = grid.value(k);
    const double d = std::abs(v - p);
    if (d < best_d - 1e-15 * std::max(1.0, std::abs(v))) {
      best = p;
      best_d = d;
    }
  }
  return best;
}

VectorXd step_target(const StepState& st, const MatrixXd& x, const MatrixXd& xt, std::size_t t) {
  const auto n = static_cast<Eigen::Index>(st.state.size());
  const auto ti = static_cast<Eigen::Index>(t);
  const VectorXd w = to_eigen(st.w_original);
  const VectorXd s = to_eigen(st.state);
  switch (st.rule) {
    case StepRule::qronos:
    case StepRule::optq: {
      VectorXd r = (st.rule == StepRule::qronos ? x : xt) * w;
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != ti) r -= s(j) * xt.col(j);
      return r;
    }
    case StepRule::gpfq: {
      VectorXd r = VectorXd::Zero(x.rows());
      for (Eigen::Index j = 0; j <= ti; ++j) r += w(j) * x.col(j);
      for (Eigen::Index j = 0; j < ti; ++j) r -= s(j) * xt.col(j);
      return r;
    }
  }
  return {};
}

}  // namespace

IlsSolution brute_force_ils(std::span<const double> w, const Matrix& x, const Matrix& xt,
                            const QuantGrid& grid, std::uint64_t max_enumeration) {
  const std::size_t n = w.size();
  if (x.cols() != n || xt.cols() != n || x.rows() != xt.rows())
    throw ShapeError("brute_force_ils: X, X~ and w dimensions disagree");
  double total = 1.0;
  for (std::size_t i = 0; i < n; ++i) total *= grid.levels;
  if (total > static_cast<double>(max_enumeration))
    throw UsageError("brute_force_ils: enumeration needs " + std::to_string(grid.levels) + "^" +
                     std::to_string(n) + " = " + std::to_string(total) + " candidates, cap is " +
                     std::to_string(max_enumeration));
  const MatrixXd ex = to_eigen(x);
  const MatrixXd ext = to_eigen(xt);
  const VectorXd target = ex * to_eigen(w);

  std::vector<int> codes(n, 0);
  IlsSolution best;
  best.objective = std::numeric_limits<double>::infinity();
  VectorXd q(static_cast<Eigen::Index>(n));
  const auto count = static_cast<std::uint64_t>(total);
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    // Row-major over codes: the last coordinate varies fastest.
    std::uint64_t rest = idx;
    for (std::size_t i = n; i-- > 0;) {
      codes[i] = static_cast<int>(rest % static_cast<std::uint64_t>(grid.levels));
      rest /= static_cast<std::uint64_t>(grid.levels);
    }
    for (std::size_t i = 0; i < n; ++i) q(static_cast<Eigen::Index>(i)) = grid.value(codes[i]);
    const double obj = 0.5 * (target - ext * q).squaredNorm();
    if (idx == 0 || strictly_better(obj, best.objective)) {
      best.objective = obj;
      best.codes = codes;
      best.q = from_eigen_vec(q);
    }
  }
  return best;
}

double step_objective(const StepState& st, const Matrix& x, const Matrix& xt, std::size_t t,
                      double p) {
  const MatrixXd ext = to_eigen(xt);
  const VectorXd r = step_target(st, to_eigen(x), ext, t);
  return 0.5 * (r - p * ext.col(static_cast<Eigen::Index>(t))).squaredNorm();
}

StepChoice stepwise_argmin(const StepState& st, const Matrix& x, const Matrix& xt,
                           const QuantGrid& grid, std::size_t t) {
  if (st.state.size() != xt.cols() || st.w_original.size() != xt.cols() || t >= xt.cols())
    throw ShapeError("stepwise_argmin: state does not match X~");
  const MatrixXd ext = to_eigen(xt);
  const VectorXd r = step_target(st, to_eigen(x), ext, t);
  return enumerate_1d(r, ext.col(static_cast<Eigen::Index>(t)), grid);
}

Vector direct_lstsq(const Matrix& a, std::span<const double> b, double lambda) {
  if (a.rows() != b.size()) throw ShapeError("direct_lstsq: A rows must match b");
  const auto n = static_cast<Eigen::Index>(a.cols());
  MatrixXd ea = to_eigen(a);
  VectorXd eb = to_eigen(b);
  if (lambda > 0.0) {
    MatrixXd aug(ea.rows() + n, n);
    aug << ea, std::sqrt(lambda) * MatrixXd::Identity(n, n);
    VectorXd baug(eb.size() + n);
    baug << eb, VectorXd::Zero(n);
    ea = std::move(aug);
    eb = std::move(baug);
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(ea);
  if (qr.rank() < n) throw NumericalError("direct_lstsq: rank-deficient system");
  return from_eigen_vec(qr.solve(eb));
}

ReferenceTrace qronos_pinv_reference(std::span<const double> w, const Matrix& x, const Matrix& xt,
                                     const QuantGrid& grid) {
  const std::size_t n = w.size();
  if (x.cols() != n || xt.cols() != n || x.rows() != xt.rows())
    throw ShapeError("qronos_pinv_reference: dimension mismatch");
  const MatrixXd ex = to_eigen(x);
  const MatrixXd ext = to_eigen(xt);
  const VectorXd target = ex * to_eigen(w);
  ReferenceTrace tr;
  Vector cur(w.begin(), w.end());
  tr.w_states.push_back(cur);
  for (std::size_t t = 0; t < n; ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    VectorXd r = target;
    for (std::size_t j = 0; j < n; ++j)
      if (j != t) r -= cur[j] * ext.col(static_cast<Eigen::Index>(j));
    cur[t] = enumerate_1d(r, ext.col(ti), grid).value;
    const std::size_t tail = n - t - 1;
    if (tail > 0) {
      VectorXd rhs = target;
      for (std::size_t j = 0; j <= t; ++j) rhs -= cur[j] * ext.col(static_cast<Eigen::Index>(j));
      const MatrixXd a = ext.rightCols(static_cast<Eigen::Index>(tail));
      Eigen::ColPivHouseholderQR<MatrixXd> qr(a);
      if (qr.rank() < static_cast<Eigen::Index>(tail))
        throw NumericalError("qronos_pinv_reference: rank-deficient X~ tail");
      const VectorXd v = qr.solve(rhs);
      for (std::size_t i = 0; i < tail; ++i) cur[t + 1 + i] = v(static_cast<Eigen::Index>(i));
    }
    tr.w_states.push_back(cur);
  }
  tr.q = cur;
  return tr;
}

ReferenceTrace optq_lsq_reference(std::span<const double> w, const Matrix& x, const QuantGrid& grid) {
  const std::size_t n = w.size();
  if (x.cols() != n) throw ShapeError("optq_lsq_reference: dimension mismatch");
  const MatrixXd ex = to_eigen(x);
  ReferenceTrace tr;
  Vector cur(w.begin(), w.end());
  tr.w_states.push_back(cur);
  for (std::size_t t = 0; t < n; ++t) {
    const double q = nearest_alphabet_point(cur[t], grid);
    const double err = q - cur[t];
    cur[t] = q;
    const std::size_t tail = n - t - 1;
    if (tail > 0) {
      const MatrixXd a = ex.rightCols(static_cast<Eigen::Index>(tail));
      const VectorXd rhs = -err * ex.col(static_cast<Eigen::Index>(t));
      Eigen::ColPivHouseholderQR<MatrixXd> qr(a);
      if (qr.rank() < static_cast<Eigen::Index>(tail))
        throw NumericalError("optq_lsq_reference: rank-deficient X tail");
      const VectorXd d = qr.solve(rhs);
      for (std::size_t i = 0; i < tail; ++i) cur[t + 1 + i] += d(static_cast<Eigen::Index>(i));
    }
    tr.w_states.push_back(cur);
  }
  tr.q = cur;
  return tr;
}

Matrix gram(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("gram: row counts differ");
  return from_eigen(to_eigen(a).transpose() * to_eigen(b));
}

Matrix direct_inverse(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("direct_inverse: matrix is not square");
  const MatrixXd e = to_eigen(m);
  Eigen::LDLT<MatrixXd> ldlt(e);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw NumericalError("direct_inverse: matrix is not positive definite");
  const auto n = static_cast<Eigen::Index>(m.rows());
  return from_eigen(ldlt.solve(MatrixXd::Identity(n, n)));
}

double dense_top_eigenvalue(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("dense_top_eigenvalue: matrix is not square");
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(to_eigen(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace qronos::oracle
