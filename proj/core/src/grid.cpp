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
#include "qronos/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qronos/error.hpp"

namespace qronos {

double round_half_away(double x) { return std::round(x); }

int levels_for_bits(double bits) {
  if (bits <= 0.0) throw UsageError("bit width must be positive");
  if (std::abs(bits - 1.58) < 1e-9) return 3;
  const double rounded = std::round(bits);
  if (std::abs(bits - rounded) > 1e-9 || rounded > 30)
    throw UsageError("unsupported bit width (use an integer <= 30 or 1.58)");
  return 1 << static_cast<int>(rounded);
}

std::vector<double> QuantGrid::alphabet() const {
  std::vector<double> a(static_cast<std::size_t>(levels));
  for (int k = 0; k < levels; ++k) a[static_cast<std::size_t>(k)] = value(k);
  return a;
}

int QuantGrid::code_of(double w) const {
  // z = z_int + z_frac: with an integer zero point this is exactly
  // round(w/s) + z, and with a fractional one it still lands on one of the
  // `levels` codes.
  const double z_int = round_half_away(zero_point);
  const double z_frac = zero_point - z_int;
  const double k = round_half_away(w / step_size + z_frac) + z_int;
  const double clipped = std::clamp(k, 0.0, static_cast<double>(levels - 1));
  return static_cast<int>(clipped);
}

double quantize_rtn(double w, const QuantGrid& grid) { return grid.value(grid.code_of(w)); }

Vector quantize_rtn(std::span<const double> w, const QuantGrid& grid) {
  Vector out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = quantize_rtn(w[i], grid);
  return out;
}

QuantGrid grid_from_minmax(std::span<const double> w, int levels, double beta) {
  if (w.empty()) throw ShapeError("grid_from_minmax: empty weight vector");
  if (levels < 2) throw UsageError("grid needs at least 2 levels");
  if (!(beta > 0.0 && beta <= 1.0)) throw UsageError("beta must lie in (0, 1]");
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  QuantGrid g;
  g.levels = levels;
  g.beta = beta;
  if (*hi == *lo) {
    g.step_size = 1.0;
    g.zero_point = -*lo;
    g.degenerate = true;
    return g;
  }
  g.step_size = beta * (*hi - *lo) / static_cast<double>(levels - 1);
  g.zero_point = -beta * *lo / g.step_size;
  return g;
}

namespace {

double rtn_sq_error(std::span<const double> w, const QuantGrid& g) {
  double e = 0.0;
  for (double v : w) {
    const double d = v - quantize_rtn(v, g);
    e += d * d;
  }
  return e;
}

}  // namespace

QuantGrid symmetric_scale_search(std::span<const double> w, int levels, int candidates) {
  if (w.empty()) throw ShapeError("symmetric_scale_search: empty weight vector");
  if (levels < 2) throw UsageError("grid needs at least 2 levels");
  if (candidates < 2) throw UsageError("symmetric_scale_search needs >= 2 candidates");
  QuantGrid g;
  g.levels = levels;
  g.symmetric = true;
  g.zero_point = static_cast<double>(levels - 1) / 2.0;
  double max_abs = 0.0;
  for (double v : w) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs == 0.0) {
    g.step_size = 1.0;
    g.degenerate = true;
    return g;
  }
  const double full = 2.0 * max_abs / static_cast<double>(levels - 1);
  double best_err = std::numeric_limits<double>::infinity();
  double best_step = full;
  for (int i = 0; i < candidates; ++i) {
    const double frac = 0.2 + 0.8 * static_cast<double>(i) / static_cast<double>(candidates - 1);
    g.step_size = frac * full;
    const double e = rtn_sq_error(w, g);
    if (e < best_err) {
      best_err = e;
      best_step = g.step_size;
    }
  }
  g.step_size = best_step;
  return g;
}

Matrix quantize_per_token(const Matrix& x, int levels) {
  Matrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = out.row(r);
    if (row.empty()) continue;
    const QuantGrid g = grid_from_minmax(row, levels, 1.0);
    if (g.degenerate) continue;
    for (double& v : row) v = quantize_rtn(v, g);
  }
  return out;
}

}  // namespace qronos
