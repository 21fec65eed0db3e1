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
#include "qronos/rounding.hpp"

#include <cmath>

#include "qronos/error.hpp"

namespace qronos {

std::string to_string(Method m) {
  switch (m) {
    case Method::rtn: return "rtn";
    case Method::optq: return "optq";
    case Method::optq_ref: return "optq-ref";
    case Method::gpfq: return "gpfq";
    case Method::qronos_base: return "qronos-base";
    case Method::qronos: return "qronos";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "rtn") return Method::rtn;
  if (s == "optq") return Method::optq;
  if (s == "optq-ref" || s == "optq_ref") return Method::optq_ref;
  if (s == "gpfq") return Method::gpfq;
  if (s == "qronos-base" || s == "qronos_base") return Method::qronos_base;
  if (s == "qronos") return Method::qronos;
  throw UsageError("unknown method '" + s + "'");
}

namespace {

void record_state(RoundingTrace& tr, bool record, std::span<const double> state) {
  if (record) tr.w_states.emplace_back(state.begin(), state.end());
}

void record_delta(RoundingTrace& tr, bool record, std::span<const double> before,
                  std::span<const double> after) {
  if (!record) return;
  Vector d(after.size());
  for (std::size_t i = 0; i < after.size(); ++i) d[i] = after[i] - before[i];
  tr.deltas.push_back(std::move(d));
}

// w_{>t} -= (w_t - q_t) * L_{>t,t} / L_tt, then w_t = q_t.
void cholesky_diffuse(Vector& cur, std::size_t t, double q, const Matrix& L) {
  const double err = (cur[t] - q) / L(t, t);
  for (std::size_t i = t + 1; i < cur.size(); ++i) cur[i] -= err * L(i, t);
  cur[t] = q;
}

void check_square(const Matrix& m, std::size_t n, const char* what) {
  require_shape(m, n, n, what);
}

}  // namespace

CholeskyFactor inverse_hessian_factor(const Matrix& h_damped) {
  return cholesky_lower(spd_inverse(h_damped));
}

RoundingTrace quantize_optq_column(std::span<const double> w, const CholeskyFactor& hinv_factor,
                                   const QuantGrid& grid, bool record) {
  const std::size_t n = w.size();
  check_square(hinv_factor.L, n, "OPTQ inverse-Hessian factor");
  RoundingTrace tr;
  Vector cur(w.begin(), w.end());
  record_state(tr, record, cur);
  for (std::size_t t = 0; t < n; ++t) {
    const double q = quantize_rtn(cur[t], grid);
    if (!(hinv_factor.L(t, t) > 0.0))
      throw NumericalError("OPTQ: non-positive Cholesky diagonal at step " + std::to_string(t + 1));
    const Vector before = record ? Vector(cur.begin() + static_cast<long>(t) + 1, cur.end()) : Vector{};
    cholesky_diffuse(cur, t, q, hinv_factor.L);
    record_delta(tr, record, before, std::span<const double>(cur).subspan(t + 1));
    record_state(tr, record, cur);
  }
  tr.q = std::move(cur);
  return tr;
}

RoundingTrace quantize_optq_column_ref(std::span<const double> w, const Matrix& x,
                                       const QuantGrid& grid, double lambda, bool record) {
  const std::size_t n = w.size();
  if (x.cols() != n)
    throw ShapeError("optq-ref: X has " + std::to_string(x.cols()) + " columns, weights have " +
                     std::to_string(n) + " rows");
  // X' = [X; sqrt(lambda) I]
  const std::size_t extra = lambda > 0.0 ? n : 0;
  Matrix xa(x.rows() + extra, n);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t j = 0; j < n; ++j) xa(r, j) = x(r, j);
  for (std::size_t j = 0; j < extra; ++j) xa(x.rows() + j, j) = std::sqrt(lambda);

  const std::size_t m = xa.rows();
  const Vector y = matvec(xa, w);
  RoundingTrace tr;
  Vector cur(w.begin(), w.end());
  record_state(tr, record, cur);
  for (std::size_t t = 0; t < n; ++t) {
    // r = y - sum_{j != t} cur_j X'_j, then q_t = Q(<r, X'_t> / |X'_t|^2).
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      auto row = xa.row(k);
      double r = y[k];
      for (std::size_t j = 0; j < n; ++j)
        if (j != t) r -= cur[j] * row[j];
      num += r * row[t];
      den += row[t] * row[t];
    }
    double q;
    bool diffuse = true;
    if (den > 0.0) {
      q = quantize_rtn(num / den, grid);
    } else {
      q = quantize_rtn(cur[t], grid);
      diffuse = false;
      tr.warnings.push_back("zero input column at step " + std::to_string(t + 1));
    }
    cur[t] = q;
    const std::size_t tail = n - t - 1;
    if (tail > 0 && diffuse) {
      // Normal equations of min_v |y - X'_{<=t} q_{<=t} - X'_{>t} v|.
      Matrix gram(tail, tail);
      Vector rhs(tail, 0.0);
      for (std::size_t k = 0; k < m; ++k) {
        auto row = xa.row(k);
        double b = y[k];
        for (std::size_t j = 0; j <= t; ++j) b -= cur[j] * row[j];
        for (std::size_t i = 0; i < tail; ++i) {
          const double xi = row[t + 1 + i];
          rhs[i] += xi * b;
          for (std::size_t j = 0; j < tail; ++j) gram(i, j) += xi * row[t + 1 + j];
        }
      }
      CholeskyFactor f;
      try {
        f = cholesky_lower(gram);
      } catch (const NumericalError&) {
        throw NumericalError("optq-ref: singular normal equations at step " + std::to_string(t + 1));
      }
      const Vector v = f.solve(rhs);
      record_delta(tr, record, std::span<const double>(cur).subspan(t + 1), v);
      std::copy(v.begin(), v.end(), cur.begin() + static_cast<long>(t) + 1);
    } else if (tail > 0) {
      record_delta(tr, record, std::span<const double>(cur).subspan(t + 1),
                   std::span<const double>(cur).subspan(t + 1));
    }
    record_state(tr, record, cur);
  }
  tr.q = std::move(cur);
  return tr;
}

RoundingTrace quantize_gpfq_column(std::span<const double> w, const Matrix& x, const Matrix& xt,
                                   const QuantGrid& grid, bool record) {
  const std::size_t n = w.size();
  if (x.cols() != n) throw ShapeError("gpfq: X column count does not match weight length");
  require_shape(xt, x.rows(), x.cols(), "gpfq: X~ (must match X)");
  const std::size_t m = x.rows();
  RoundingTrace tr;
  Vector cur(w.begin(), w.end());
  Vector u(m, 0.0);
  record_state(tr, record, cur);
  for (std::size_t t = 0; t < n; ++t) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      num += (u[k] + w[t] * x(k, t)) * xt(k, t);
      den += xt(k, t) * xt(k, t);
    }
    double q;
    if (den > 0.0) {
      q = quantize_rtn(num / den, grid);
    } else {
      q = quantize_rtn(w[t], grid);
      tr.warnings.push_back("zero X~ column at step " + std::to_string(t + 1));
    }
    for (std::size_t k = 0; k < m; ++k) u[k] += w[t] * x(k, t) - q * xt(k, t);
    cur[t] = q;
    record_state(tr, record, cur);
  }
  tr.q = std::move(cur);
  return tr;
}

RoundingTrace quantize_gpfq_column_hg(std::span<const double> w, const Matrix& h, const Matrix& g,
                                   const QuantGrid& grid, bool record) {
  const std::size_t n = w.size();
  check_square(h, n, "gpfq: H");
  check_square(g, n, "gpfq: G");
  RoundingTrace tr;
  Vector cur(w.begin(), w.end());
  record_state(tr, record, cur);
  for (std::size_t t = 0; t < n; ++t) {
    auto grow = g.row(t);
    auto hrow = h.row(t);
    double num = 0.0;
    for (std::size_t j = 0; j <= t; ++j) num += grow[j] * w[j];
    for (std::size_t j = 0; j < t; ++j) num -= hrow[j] * cur[j];
    double q;
    if (hrow[t] > 0.0) {
      q = quantize_rtn(num / hrow[t], grid);
    } else {
      q = quantize_rtn(w[t], grid);
      tr.warnings.push_back("zero X~ column at step " + std::to_string(t + 1));
    }
    cur[t] = q;
    record_state(tr, record, cur);
  }
  tr.q = std::move(cur);
  return tr;
}

std::vector<RoundingTrace> quantize_qronos_base_columns(const Matrix& w, const Matrix& h,
                                                        const Matrix& g,
                                                        std::span<const QuantGrid> grids,
                                                        bool record) {
  const std::size_t n = w.rows();
  const std::size_t cols = w.cols();
  check_square(h, n, "qronos-base: H");
  check_square(g, n, "qronos-base: G");
  if (grids.size() != cols) throw ShapeError("qronos-base: need one grid per column");

  std::vector<RoundingTrace> traces(cols);
  std::vector<Vector> cur(cols), gw(cols), hq(cols, Vector(n, 0.0));
  std::vector<bool> diffuse(cols, true);
  for (std::size_t c = 0; c < cols; ++c) {
    cur[c] = w.column(c);
    gw[c] = matvec(g, cur[c]);
    record_state(traces[c], record, cur[c]);
  }

  for (std::size_t t = 0; t < n; ++t) {
    const double htt = h(t, t);
    auto hrow = h.row(t);
    for (std::size_t c = 0; c < cols; ++c) {
      Vector& v = cur[c];
      double q;
      diffuse[c] = htt > 0.0;
      if (diffuse[c]) {
        // <Xw - X~_{<t} q_{<t} - X~_{>t} w_{>t}, X~_t> / |X~_t|^2 on (H, G).
        double num = gw[c][t] - hq[c][t];
        for (std::size_t j = t + 1; j < n; ++j) num -= hrow[j] * v[j];
        q = quantize_rtn(num / htt, grids[c]);
      } else {
        q = quantize_rtn(v[t], grids[c]);
        traces[c].warnings.push_back("zero X~ column at step " + std::to_string(t + 1));
      }
      v[t] = q;
      for (std::size_t i = 0; i < n; ++i) hq[c][i] += h(i, t) * q;
    }

    const std::size_t tail = n - t - 1;
    if (tail > 0) {
      // (H_{>t,>t})^{-1} (G_{>t,:} w - H_{>t,<=t} q_{<=t}), factored once per step.
      CholeskyFactor f;
      bool factored = false;
      for (std::size_t c = 0; c < cols; ++c) {
        if (!diffuse[c]) {
          record_delta(traces[c], record, std::span<const double>(cur[c]).subspan(t + 1),
                       std::span<const double>(cur[c]).subspan(t + 1));
          continue;
        }
        if (!factored) {
          try {
            f = cholesky_lower(h.block(t + 1, t + 1, tail, tail));
          } catch (const NumericalError& e) {
            throw NumericalError("qronos-base: singular trailing block at step " +
                                 std::to_string(t + 1) + " (" + e.what() + ")");
          }
          factored = true;
        }
        Vector rhs(tail);
        for (std::size_t i = 0; i < tail; ++i) rhs[i] = gw[c][t + 1 + i] - hq[c][t + 1 + i];
        const Vector sol = f.solve(rhs);
        record_delta(traces[c], record, std::span<const double>(cur[c]).subspan(t + 1), sol);
        std::copy(sol.begin(), sol.end(), cur[c].begin() + static_cast<long>(t) + 1);
      }
    }
    for (std::size_t c = 0; c < cols; ++c) record_state(traces[c], record, cur[c]);
  }
  for (std::size_t c = 0; c < cols; ++c) traces[c].q = std::move(cur[c]);
  return traces;
}

RoundingTrace quantize_qronos_base_column(std::span<const double> w, const Matrix& h,
                                          const Matrix& g, const QuantGrid& grid, bool record) {
  Matrix wm(w.size(), 1);
  wm.set_column(0, w);
  auto traces = quantize_qronos_base_columns(wm, h, g, std::span<const QuantGrid>(&grid, 1), record);
  return std::move(traces.front());
}

FirstStep qronos_first_step(std::span<const double> w, const Matrix& h, const Matrix& g,
                            const CholeskyFactor& hinv_factor, const QuantGrid& grid) {
  const std::size_t n = w.size();
  check_square(h, n, "qronos: H");
  check_square(g, n, "qronos: G");
  check_square(hinv_factor.L, n, "qronos: inverse-Hessian factor");
  if (n == 0) throw ShapeError("qronos: empty weight column");
  if (!(h(0, 0) > 0.0)) throw NumericalError("qronos: H_11 is not positive");
  FirstStep s;
  double num = dot(g.row(0), w);
  for (std::size_t j = 1; j < n; ++j) num -= h(0, j) * w[j];
  s.q1 = quantize_rtn(num / h(0, 0), grid);

  const std::size_t tail = n - 1;
  Vector b(tail);
  for (std::size_t i = 0; i < tail; ++i) b[i] = dot(g.row(i + 1), w) - h(i + 1, 0) * s.q1;
  // y = L2^T b, then x = L2 y, with L2 = L_{>=2,>=2}.
  const Matrix& L = hinv_factor.L;
  Vector y(tail, 0.0);
  for (std::size_t k = 0; k < tail; ++k) {
    auto lrow = L.row(k + 1);
    const double bk = b[k];
    for (std::size_t i = 0; i <= k; ++i) y[i] += lrow[i + 1] * bk;
  }
  s.w_tail.assign(tail, 0.0);
  for (std::size_t i = 0; i < tail; ++i) {
    auto lrow = L.row(i + 1);
    double acc = 0.0;
    for (std::size_t k = 0; k <= i; ++k) acc += lrow[k + 1] * y[k];
    s.w_tail[i] = acc;
  }
  return s;
}

RoundingTrace quantize_qronos_column(std::span<const double> w, const Matrix& h, const Matrix& g,
                                     const CholeskyFactor& hinv_factor, const QuantGrid& grid,
                                     bool record) {
  const std::size_t n = w.size();
  RoundingTrace tr;
  Vector cur(w.begin(), w.end());
  record_state(tr, record, cur);
  if (n == 0) return tr;
  const FirstStep first = qronos_first_step(w, h, g, hinv_factor, grid);
  cur[0] = first.q1;
  record_delta(tr, record, std::span<const double>(w).subspan(1), first.w_tail);
  std::copy(first.w_tail.begin(), first.w_tail.end(), cur.begin() + 1);
  record_state(tr, record, cur);
  for (std::size_t t = 1; t < n; ++t) {
    const double q = quantize_rtn(cur[t], grid);
    const Vector before = record ? Vector(cur.begin() + static_cast<long>(t) + 1, cur.end()) : Vector{};
    cholesky_diffuse(cur, t, q, hinv_factor.L);
    record_delta(tr, record, before, std::span<const double>(cur).subspan(t + 1));
    record_state(tr, record, cur);
  }
  tr.q = std::move(cur);
  return tr;
}

Matrix quantize_rtn_layer(const Matrix& w, std::span<const QuantGrid> grids) {
  if (grids.size() != w.cols())
    throw ShapeError("rtn: " + std::to_string(grids.size()) + " grids for " +
                     std::to_string(w.cols()) + " columns");
  Matrix q(w.rows(), w.cols());
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t c = 0; c < w.cols(); ++c) q(r, c) = quantize_rtn(w(r, c), grids[c]);
  return q;
}

double residual_objective(std::span<const double> w, std::span<const double> q, const Matrix& x,
                          const Matrix& xt) {
  const Vector xw = matvec(x, w);
  const Vector xq = matvec(xt, q);
  double s = 0.0;
  for (std::size_t k = 0; k < xw.size(); ++k) s += (xw[k] - xq[k]) * (xw[k] - xq[k]);
  return 0.5 * s;
}

double quadratic_objective(std::span<const double> w, std::span<const double> q, const Matrix& h,
                           const Matrix& g) {
  const Vector hq = matvec(h, q);
  const Vector gw = matvec(g, w);
  return 0.5 * dot(q, hq) - dot(q, gw);
}

LayerQuantResult quantize_layer(const LayerQuantRequest& req) {
  const std::size_t n = req.W.rows();
  const std::size_t cols = req.W.cols();
  if (req.stats.dim != n)
    throw ShapeError("layer: statistics have dimension " + std::to_string(req.stats.dim) +
                     " but W has " + std::to_string(n) + " rows");
  if (req.grids.size() != cols)
    throw ShapeError("layer: " + std::to_string(req.grids.size()) + " grids for " +
                     std::to_string(cols) + " columns");
  if (req.x && req.x->cols() != n) throw ShapeError("layer: X column count does not match W");
  if (req.xt && req.xt->cols() != n) throw ShapeError("layer: X~ column count does not match W");

  LayerQuantResult res;
  res.report.method = to_string(req.method);
  res.report.damping = req.damping;

  if (req.method == Method::rtn) {
    res.Q = quantize_rtn_layer(req.W, req.grids);
    res.report.damping = DampingPolicy{};
    res.report.order.resize(n);
    for (std::size_t i = 0; i < n; ++i) res.report.order[i] = i;
  } else {
    const ColumnOrder order = req.order_by_diag ? order_by_diag(req.stats.H) : ColumnOrder::identity(n);
    res.report.order = order.perm;
    const Matrix wp = permute_weights(req.W, order);
    const CalibStats sp = permute_stats(req.stats, order);
    DampedMatrix damped = apply_damping(sp.H, req.damping);
    res.report.damping = damped.policy;
    const double lambda = damped.policy.resolved_lambda;
    const Matrix& hd = damped.matrix;
    Matrix gd = sp.G;
    add_to_diagonal(gd, lambda);

    Matrix qp(n, cols);
    std::vector<RoundingTrace> traces;
    traces.reserve(cols);
    switch (req.method) {
      case Method::optq: {
        const CholeskyFactor f = inverse_hessian_factor(hd);
        for (std::size_t c = 0; c < cols; ++c)
          traces.push_back(quantize_optq_column(wp.column(c), f, req.grids[c], req.record_trace));
        break;
      }
      case Method::optq_ref: {
        const Matrix* input = req.xt ? req.xt : req.x;
        if (!input) throw UsageError("optq-ref needs the raw layer input (X~ or X)");
        const Matrix xp = permute_columns(*input, order);
        for (std::size_t c = 0; c < cols; ++c)
          traces.push_back(
              quantize_optq_column_ref(wp.column(c), xp, req.grids[c], lambda, req.record_trace));
        break;
      }
      case Method::gpfq:
        for (std::size_t c = 0; c < cols; ++c)
          traces.push_back(quantize_gpfq_column_hg(wp.column(c), hd, gd, req.grids[c], req.record_trace));
        break;
      case Method::qronos_base:
        traces = quantize_qronos_base_columns(wp, hd, gd, req.grids, req.record_trace);
        break;
      case Method::qronos: {
        const CholeskyFactor f = inverse_hessian_factor(hd);
        for (std::size_t c = 0; c < cols; ++c)
          traces.push_back(
              quantize_qronos_column(wp.column(c), hd, gd, f, req.grids[c], req.record_trace));
        break;
      }
      case Method::rtn: break;
    }
    for (std::size_t c = 0; c < cols; ++c) {
      qp.set_column(c, traces[c].q);
      for (const auto& msg : traces[c].warnings)
        res.report.warnings.push_back("column " + std::to_string(c + 1) + ": " + msg);
    }
    res.Q = unpermute_result(qp, order);
    if (req.record_trace) res.traces = std::move(traces);
  }

  if (!req.compute_objectives) return res;
  const bool have_raw = req.x && req.xt;
  res.report.objective_form = have_raw ? "residual" : "quadratic_hg";
  res.report.objectives.resize(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    const Vector w = req.W.column(c);
    const Vector q = res.Q.column(c);
    res.report.objectives[c] = have_raw ? residual_objective(w, q, *req.x, *req.xt)
                                        : quadratic_objective(w, q, req.stats.H, req.stats.G);
    res.report.total_objective += res.report.objectives[c];
    if (req.record_trace && c < res.traces.size()) res.traces[c].objective = res.report.objectives[c];
  }
  return res;
}

}  // namespace qronos
