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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qronos/calib.hpp"
#include "qronos/grid.hpp"
#include "qronos/linalg.hpp"
#include "qronos/matrix.hpp"

namespace qronos {

enum class Method { rtn, optq, optq_ref, gpfq, qronos_base, qronos };

std::string to_string(Method m);
/// Accepts the CLI spellings (rtn, optq, optq-ref, gpfq, qronos, qronos-base).
Method method_from_string(const std::string& s);

/// Per-column record of one rounding pass.
///
/// w_states[t] is the full state after t steps, (q_1..q_t, w^(t)_{t+1..N}),
/// so w_states[0] is the input column and w_states[N] equals q. deltas[t-1]
/// is the correction applied to the surviving tail at step t (empty for
/// methods that do not diffuse).
struct RoundingTrace {
  Vector q;
  std::vector<Vector> w_states;
  std::vector<Vector> deltas;
  std::optional<double> objective;
  std::vector<std::string> warnings;
};

/// OPTQ / Algorithm 2: q_t = Q(w_t), w_{>t} -= (w_t - q_t) L_{>t,t} / L_tt,
/// where L is the Cholesky factor of the damped inverse Hessian.
RoundingTrace quantize_optq_column(std::span<const double> w, const CholeskyFactor& hinv_factor,
                                   const QuantGrid& grid, bool record = false);

/// Argmin-form OPTQ on the raw layer input X (m x N): every step picks q_t
/// by correcting the full residual and re-solves the surviving weights by
/// least squares. lambda > 0 appends sqrt(lambda)*I rows to X, which is the
/// problem the damped Cholesky form solves.
RoundingTrace quantize_optq_column_ref(std::span<const double> w, const Matrix& x,
                                       const QuantGrid& grid, double lambda = 0.0,
                                       bool record = false);

/// GPFQ path following on raw activations: u_0 = 0,
/// q_t = Q(<u_{t-1} + w_t X_t, X~_t> / |X~_t|^2), u_t = u_{t-1} + w_t X_t - q_t X~_t.
RoundingTrace quantize_gpfq_column(std::span<const double> w, const Matrix& x, const Matrix& xt,
                                   const QuantGrid& grid, bool record = false);

/// The same GPFQ iterates evaluated from H = X~^T X~ and G = X~^T X only.
RoundingTrace quantize_gpfq_column_hg(std::span<const double> w, const Matrix& h, const Matrix& g,
                                   const QuantGrid& grid, bool record = false);

/// Base Qronos: each step solves the error-correction problem for q_t in
/// closed form and re-solves the full least-squares problem for the
/// surviving weights, all on the damped (H, G).
RoundingTrace quantize_qronos_base_column(std::span<const double> w, const Matrix& h,
                                          const Matrix& g, const QuantGrid& grid,
                                          bool record = false);

/// Base Qronos for many columns at once. Every step factors the trailing
/// block of H once and reuses it for all columns; per-column arithmetic is
/// identical to quantize_qronos_base_column.
std::vector<RoundingTrace> quantize_qronos_base_columns(const Matrix& w, const Matrix& h,
                                                        const Matrix& g,
                                                        std::span<const QuantGrid> grids,
                                                        bool record = false);

struct FirstStep {
  double q1 = 0.0;
  Vector w_tail;  ///< w^(1)_{2..N}
};

/// First Qronos step from square statistics only:
///   q_1 = Q((G_{1,:} w - H_{1,>=2} w_{>=2}) / H_11)
///   w^(1)_{>=2} = L_{>=2,>=2} L_{>=2,>=2}^T (G_{>=2,:} w - H_{>=2,1} q_1)
FirstStep qronos_first_step(std::span<const double> w, const Matrix& h, const Matrix& g,
                            const CholeskyFactor& hinv_factor, const QuantGrid& grid);

/// Efficient Qronos (Algorithm 1): the first step above, then OPTQ-style
/// RTN plus Cholesky error diffusion for t >= 2.
RoundingTrace quantize_qronos_column(std::span<const double> w, const Matrix& h, const Matrix& g,
                                     const CholeskyFactor& hinv_factor, const QuantGrid& grid,
                                     bool record = false);

/// Cholesky factor of the inverse of a (damped) Hessian.
CholeskyFactor inverse_hessian_factor(const Matrix& h_damped);

struct LayerQuantRequest {
  Matrix W;                      ///< N x N'
  CalibStats stats;              ///< undamped H, G
  std::vector<QuantGrid> grids;  ///< one per column of W
  DampingPolicy damping;
  Method method = Method::qronos;
  bool record_trace = false;
  bool order_by_diag = true;
  bool compute_objectives = true;
  // Optional raw activations (m x N). Needed by optq_ref; when both are
  // present the reported objective is 1/2 |X w - X~ q|^2.
  const Matrix* x = nullptr;
  const Matrix* xt = nullptr;
};

struct LayerReport {
  std::string method;
  std::vector<double> objectives;  ///< per output column
  double total_objective = 0.0;
  /// "residual" = 1/2 |Xw - X~q|^2; "quadratic_hg" = 1/2 q^T H q - q^T G w
  /// (the residual form minus the constant 1/2 |Xw|^2).
  std::string objective_form;
  DampingPolicy damping;
  std::vector<std::size_t> order;  ///< processing order (original indices)
  std::vector<std::string> warnings;
};

struct LayerQuantResult {
  Matrix Q;
  LayerReport report;
  /// Traces are in processing order, only filled when record_trace is set.
  std::vector<RoundingTrace> traces;
};

/// Element-wise RTN with per-column grids.
Matrix quantize_rtn_layer(const Matrix& w, std::span<const QuantGrid> grids);

/// Runs one rounding method over every column of W.
LayerQuantResult quantize_layer(const LayerQuantRequest& req);

/// 1/2 |X w - X~ q|^2.
double residual_objective(std::span<const double> w, std::span<const double> q, const Matrix& x,
                          const Matrix& xt);
/// 1/2 q^T H q - q^T G w.
double quadratic_objective(std::span<const double> w, std::span<const double> q, const Matrix& h,
                           const Matrix& g);

}  // namespace qronos
