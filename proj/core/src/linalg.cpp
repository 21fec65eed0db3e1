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
#include "qronos/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qronos/error.hpp"

namespace qronos {

namespace {

void require_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw ShapeError(std::string(what) + ": matrix is not square");
  double scale = 0.0;
  for (double v : m.data()) scale = std::max(scale, std::abs(v));
  const double tol = 1e-9 * std::max(scale, 1e-300);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > tol)
        throw ShapeError(std::string(what) + ": matrix is not symmetric at (" +
                         std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
}

}  // namespace

CholeskyFactor cholesky_lower(const Matrix& m) {
  require_symmetric(m, "cholesky_lower");
  const std::size_t n = m.rows();
  CholeskyFactor f{Matrix(n, n), n};
  Matrix& L = f.L;
  // Row-oriented Cholesky-Crout: only the lower triangle of m is read.
  for (std::size_t i = 0; i < n; ++i) {
    auto li = L.row(i);
    for (std::size_t j = 0; j <= i; ++j) {
      auto lj = L.row(j);
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      if (i == j) {
        if (!(s > 0.0) || !std::isfinite(s))
          throw NumericalError("not positive definite at pivot " + std::to_string(i + 1));
        li[i] = std::sqrt(s);
      } else {
        li[j] = s / lj[j];
      }
    }
  }
  return f;
}

Vector solve_lower(const Matrix& lower, std::span<const double> b) {
  const std::size_t n = lower.rows();
  Vector y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    auto li = lower.row(i);
    double s = y[i];
    for (std::size_t k = 0; k < i; ++k) s -= li[k] * y[k];
    y[i] = s / li[i];
  }
  return y;
}

Vector solve_lower_transpose(const Matrix& lower, std::span<const double> y) {
  const std::size_t n = lower.rows();
  Vector x(y.begin(), y.end());
  for (std::size_t ii = n; ii-- > 0;) {
    x[ii] /= lower(ii, ii);
    const double xi = x[ii];
    auto li = lower.row(ii);
    for (std::size_t k = 0; k < ii; ++k) x[k] -= li[k] * xi;
  }
  return x;
}

Vector CholeskyFactor::solve(std::span<const double> b) const {
  if (b.size() != source_dim) throw ShapeError("CholeskyFactor::solve: length mismatch");
  return solve_lower_transpose(L, solve_lower(L, b));
}

Matrix CholeskyFactor::reconstruct() const {
  const std::size_t n = source_dim;
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = dot(L.row(i).first(j + 1), L.row(j).first(j + 1));
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

Matrix spd_inverse(const Matrix& m) {
  const CholeskyFactor f = cholesky_lower(m);
  const std::size_t n = m.rows();
  // Invert L (lower triangular), then M^{-1} = L^{-T} L^{-1}.
  Matrix linv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    linv(j, j) = 1.0 / f.L(j, j);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = j; k < i; ++k) s -= f.L(i, k) * linv(k, j);
      linv(i, j) = s / f.L(i, i);
    }
  }
  Matrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = i; k < n; ++k) s += linv(k, i) * linv(k, j);
      inv(i, j) = s;
      inv(j, i) = s;
    }
  return inv;
}

double top_singular_value(const Matrix& m, const PowerIterationOptions& opts) {
  require_symmetric(m, "top_singular_value");
  const std::size_t n = m.rows();
  if (n == 0) return 0.0;
  double scale = 0.0;
  for (double v : m.data()) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  Vector v(n);
  auto randomize = [&] {
    for (double& x : v) x = normal(rng);
    const double vn = norm2(v);
    for (double& x : v) x /= vn;
  };
  randomize();
  double estimate = 0.0;
  double prev_delta = -1.0;
  int restarts = 0;
  for (int it = 0; it < opts.max_iter; ++it) {
    Vector mv = matvec(m, v);
    const double nrm = norm2(mv);
    if (nrm <= 1e-300) {
      if (++restarts > 8) return 0.0;
      randomize();
      prev_delta = -1.0;
      continue;
    }
    const double rayleigh = dot(v, mv);
    for (std::size_t i = 0; i < n; ++i) v[i] = mv[i] / nrm;
    if (it > 0) {
      // The Rayleigh quotient converges geometrically; stop once the
      // extrapolated remaining change is within tolerance.
      const double delta = std::abs(rayleigh - estimate);
      if (delta == 0.0) return rayleigh;
      if (prev_delta > 0.0) {
        const double ratio = delta / prev_delta;
        if (ratio < 1.0 && delta <= opts.tol * std::abs(rayleigh) * (1.0 - ratio)) return rayleigh;
      }
      prev_delta = delta;
    }
    estimate = rayleigh;
  }
  throw NumericalError("power iteration did not converge after " + std::to_string(opts.max_iter) +
                       " iterations (last estimate " + std::to_string(estimate) + ")");
}

DampingPolicy damping_mean_diag() { return {DampingMode::mean_diag_percent, 0.01, 0.0}; }

DampingPolicy damping_top_singular(double alpha) {
  return {DampingMode::top_singular_fraction, alpha, 0.0};
}

std::string to_string(DampingMode mode) {
  switch (mode) {
    case DampingMode::none: return "none";
    case DampingMode::mean_diag_percent: return "meandiag";
    case DampingMode::top_singular_fraction: return "topsv";
  }
  return "none";
}

DampingMode damping_mode_from_string(const std::string& s) {
  if (s == "none") return DampingMode::none;
  if (s == "meandiag") return DampingMode::mean_diag_percent;
  if (s == "topsv") return DampingMode::top_singular_fraction;
  throw UsageError("unknown damping mode '" + s + "' (expected meandiag, topsv or none)");
}

void add_to_diagonal(Matrix& m, double lambda) {
  for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) m(i, i) += lambda;
}

DampedMatrix apply_damping(const Matrix& h, DampingPolicy policy) {
  if (h.rows() != h.cols()) throw ShapeError("apply_damping: matrix is not square");
  double lambda = 0.0;
  switch (policy.mode) {
    case DampingMode::none: break;
    case DampingMode::mean_diag_percent: {
      double tr = 0.0;
      for (std::size_t i = 0; i < h.rows(); ++i) tr += h(i, i);
      lambda = h.rows() == 0 ? 0.0 : 0.01 * tr / static_cast<double>(h.rows());
      break;
    }
    case DampingMode::top_singular_fraction: lambda = policy.alpha * top_singular_value(h); break;
  }
  policy.resolved_lambda = std::max(lambda, 0.0);
  DampedMatrix out{h, policy};
  if (policy.resolved_lambda != 0.0) add_to_diagonal(out.matrix, policy.resolved_lambda);
  return out;
}

Matrix inverse_hessian_step(const Matrix& hinv) {
  if (hinv.rows() != hinv.cols() || hinv.rows() == 0)
    throw ShapeError("inverse_hessian_step: need a non-empty square matrix");
  const double pivot = hinv(0, 0);
  if (pivot == 0.0) throw NumericalError("inverse_hessian_step: zero leading entry");
  const std::size_t n = hinv.rows() - 1;
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out(i, j) = hinv(i + 1, j + 1) - hinv(i + 1, 0) * hinv(0, j + 1) / pivot;
  return out;
}

Vector project_residual(std::span<const double> r, const Matrix& b, double lambda) {
  if (b.rows() != r.size()) throw ShapeError("project_residual: B rows must equal residual length");
  Matrix gram = matmul_tn(b, b);
  add_to_diagonal(gram, lambda);
  CholeskyFactor f;
  try {
    f = cholesky_lower(gram);
  } catch (const NumericalError&) {
    throw NumericalError("project_residual: singular normal equations (add damping)");
  }
  Vector btr(b.cols(), 0.0);
  for (std::size_t k = 0; k < b.rows(); ++k) {
    auto brow = b.row(k);
    for (std::size_t j = 0; j < b.cols(); ++j) btr[j] += brow[j] * r[k];
  }
  const Vector coef = f.solve(btr);
  Vector out(r.begin(), r.end());
  for (std::size_t k = 0; k < b.rows(); ++k) out[k] -= dot(b.row(k), coef);
  return out;
}

}  // namespace qronos
