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
#include <cstdint>
#include <span>
#include <string>

#include "qronos/matrix.hpp"

namespace qronos {

/// Lower-triangular L with M = L L^T.
struct CholeskyFactor {
  Matrix L;
  std::size_t source_dim = 0;

  /// Solves (L L^T) x = b.
  Vector solve(std::span<const double> b) const;
  /// L L^T, the matrix that was factored.
  Matrix reconstruct() const;
};

/// Factors a symmetric positive-definite matrix. Throws NumericalError
/// ("not positive definite at pivot k", 1-based) on a non-positive pivot
/// and ShapeError when M is not square or not symmetric to 1e-9 relative.
CholeskyFactor cholesky_lower(const Matrix& m);

/// Forward substitution L y = b.
Vector solve_lower(const Matrix& lower, std::span<const double> b);
/// Back substitution L^T x = y.
Vector solve_lower_transpose(const Matrix& lower, std::span<const double> y);

/// Inverse of an SPD matrix through its Cholesky factor, symmetrized.
Matrix spd_inverse(const Matrix& m);

struct PowerIterationOptions {
  double tol = 1e-6;
  int max_iter = 10000;
  std::uint64_t seed = 0;
};

/// Largest eigenvalue (= top singular value) of a symmetric PSD matrix by
/// power iteration from a seeded Gaussian start vector, restarted if the
/// iterate collapses to zero.
double top_singular_value(const Matrix& m, const PowerIterationOptions& opts = {});

enum class DampingMode { none, mean_diag_percent, top_singular_fraction };

struct DampingPolicy {
  DampingMode mode = DampingMode::none;
  double alpha = 0.0;            ///< only used by top_singular_fraction
  double resolved_lambda = 0.0;  ///< filled by apply_damping
};

DampingPolicy damping_mean_diag();
DampingPolicy damping_top_singular(double alpha);
std::string to_string(DampingMode mode);
DampingMode damping_mode_from_string(const std::string& s);

struct DampedMatrix {
  Matrix matrix;
  DampingPolicy policy;
};

/// H + lambda*I, with lambda = 0.01*mean(diag H) or alpha*sigma1(H).
DampedMatrix apply_damping(const Matrix& h, DampingPolicy policy);
/// Adds lambda to the diagonal in place.
void add_to_diagonal(Matrix& m, double lambda);

/// Given (H_{>=t,>=t})^{-1}, returns (H_{>=t+1,>=t+1})^{-1} by a rank-1
/// downdate followed by dropping the first row and column.
Matrix inverse_hessian_step(const Matrix& hinv);

/// R - B (B^T B + lambda I)^{-1} B^T R.
Vector project_residual(std::span<const double> r, const Matrix& b, double lambda = 0.0);

}  // namespace qronos
