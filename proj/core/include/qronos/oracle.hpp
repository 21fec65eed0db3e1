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
#include <vector>

#include "qronos/grid.hpp"
#include "qronos/matrix.hpp"

// Independent reference solvers for the test and verification suites.
// Nothing in here calls into the rounding or linalg modules: least squares,
// inverses and eigenvalues go through Eigen, and every discrete choice is
// made by enumerating the alphabet.
namespace qronos::oracle {

struct IlsSolution {
  Vector q;
  std::vector<int> codes;
  double objective = 0.0;  ///< 1/2 |X w - X~ q|^2
};

/// Exhaustive search over alphabet^N. Throws UsageError when levels^N
/// exceeds `max_enumeration`.
IlsSolution brute_force_ils(std::span<const double> w, const Matrix& x, const Matrix& xt,
                            const QuantGrid& grid, std::uint64_t max_enumeration = 1u << 20);

/// Which one-dimensional problem a greedy method solves at step t.
enum class StepRule {
  qronos,  ///< min_p |Xw - sum_{j<t} q_j X~_j - p X~_t - sum_{j>t} w^(t-1)_j X~_j|
  optq,    ///< same with X~ in place of X (the method only sees one input)
  gpfq,    ///< min_p |sum_{j<=t} w_j X_j - sum_{j<t} q_j X~_j - p X~_t|
};

struct StepState {
  StepRule rule = StepRule::qronos;
  Vector w_original;
  Vector state;  ///< w^(t-1): (q_1..q_{t-1}, w^(t-1)_t..N)
};

struct StepChoice {
  double value = 0.0;
  double objective = 0.0;
};

/// Objective of picking p at step t (0-based) from `st`.
double step_objective(const StepState& st, const Matrix& x, const Matrix& xt, std::size_t t,
                      double p);

/// Enumerates the alphabet for step t; ties within 1e-12 keep the lowest code.
StepChoice stepwise_argmin(const StepState& st, const Matrix& x, const Matrix& xt,
                           const QuantGrid& grid, std::size_t t);

/// min_v |A v - b|^2 (+ lambda |v|^2) by column-pivoted Householder QR.
Vector direct_lstsq(const Matrix& a, std::span<const double> b, double lambda = 0.0);

struct ReferenceTrace {
  Vector q;
  std::vector<Vector> w_states;  ///< w_states[t] = state after t steps
};

/// Qronos in pseudoinverse form, lambda = 0: q_t by enumeration of the
/// error-correction problem, w^(t)_{>t} = X~_{>t}^+ (Xw - X~_{<=t} q_{<=t}).
ReferenceTrace qronos_pinv_reference(std::span<const double> w, const Matrix& x, const Matrix& xt,
                                     const QuantGrid& grid);

/// OPTQ in incremental least-squares form: q_t = nearest alphabet point to
/// w_t, then w_{>t} minimizes |(q_t - w_t) X_t + sum_{j>t} (v_j - w_j) X_j|.
ReferenceTrace optq_lsq_reference(std::span<const double> w, const Matrix& x, const QuantGrid& grid);

/// A^T B.
Matrix gram(const Matrix& a, const Matrix& b);
/// Inverse of an SPD matrix by Eigen's LDLT.
Matrix direct_inverse(const Matrix& m);
/// Largest eigenvalue of a symmetric matrix by a dense eigensolve.
double dense_top_eigenvalue(const Matrix& m);

}  // namespace qronos::oracle
