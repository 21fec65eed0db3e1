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
#include <span>
#include <vector>

#include "qronos/matrix.hpp"

namespace qronos {

/// A uniform quantization alphabet {s * (k - z) : k = 0 .. levels-1}.
///
/// `zero_point` is kept real-valued. Asymmetric grids built from data map
/// the integer code 0 to beta*min(w) and levels-1 to beta*max(w); symmetric
/// grids centre the codes with zero_point = (levels-1)/2.
struct QuantGrid {
  int levels = 2;
  double step_size = 1.0;
  double zero_point = 0.0;
  double beta = 1.0;
  bool symmetric = false;
  bool degenerate = false;

  /// Dequantized value of integer code k.
  double value(int code) const { return step_size * (static_cast<double>(code) - zero_point); }
  /// All representable values in increasing code order.
  std::vector<double> alphabet() const;
  /// Integer code RTN would select for w (after clipping).
  int code_of(double w) const;
};

/// Round half away from zero; the single tie rule used everywhere.
double round_half_away(double x);

/// Level count for a bit width; 1.58 bits is the ternary grid.
int levels_for_bits(double bits);

/// Scaled min-max asymmetric grid: s = beta*(max-min)/(levels-1), z = -beta*min/s.
/// A constant vector yields a degenerate grid with s = 1, z = -min.
QuantGrid grid_from_minmax(std::span<const double> w, int levels, double beta = 1.0);

/// The RTN operator s * (clip(round(w/s + z); 0, levels-1) - z).
double quantize_rtn(double w, const QuantGrid& grid);
Vector quantize_rtn(std::span<const double> w, const QuantGrid& grid);

/// Symmetric grid chosen by linear search over `candidates` step sizes in
/// [0.2, 1.0] * 2*max|w|/(levels-1), minimizing the squared RTN error.
QuantGrid symmetric_scale_search(std::span<const double> w, int levels, int candidates = 100);

/// Dynamic per-row asymmetric min-max quantization (beta = 1).
Matrix quantize_per_token(const Matrix& x, int levels);

}  // namespace qronos
