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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qronos/grid.hpp"
#include "qronos/linalg.hpp"
#include "qronos/matrix.hpp"
#include "qronos/rounding.hpp"

namespace qronos {

enum class Activation { none, relu };

struct WeightGridConfig {
  int levels = 8;
  double beta = 1.0;
  bool symmetric = false;
};

struct LayerDef {
  Matrix weight;  ///< in x out
  Activation activation = Activation::none;
  bool hadamard = false;
};

/// A chain of linear layers with optional relu, the toy stand-in for a
/// stack of transformer blocks.
struct NetworkSpec {
  std::vector<LayerDef> layers;
  std::vector<std::size_t> block_boundaries;  ///< layers at which X~ is reset to X
  std::vector<WeightGridConfig> weight_grids;   ///< one per layer
  std::optional<int> act_levels;                ///< per-token activation quantization
  std::uint64_t seed = 0;

  /// Throws ShapeError/UsageError on inconsistent dimensions, boundaries or
  /// non power-of-two widths on rotated layers.
  void validate() const;
  bool is_block_start(std::size_t layer) const;
};

struct RandomNetworkOptions {
  std::size_t layers = 4;
  std::size_t width = 64;
  std::size_t blocks = 1;
  int weight_levels = 3;
  double beta = 1.0;
  std::optional<int> act_levels;
  bool hadamard = false;
  std::uint64_t seed = 0;
};

/// Gaussian weights scaled by 1/sqrt(width), relu between layers, blocks of
/// equal length.
NetworkSpec make_random_network(const RandomNetworkOptions& opts);

/// Seeded standard Gaussian matrix.
Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// Quantized weights of one layer. When `rotated` is set the weights act
/// on Hadamard-rotated inputs.
struct QuantizedLayer {
  Matrix weight;
  bool rotated = false;
};

struct ForwardPair {
  std::vector<Matrix> x;    ///< full-precision input of each layer
  std::vector<Matrix> xt;   ///< input of each layer along the quantized path
  std::vector<Matrix> y;    ///< full-precision output of each layer
  std::vector<Matrix> yt;   ///< quantized-path output of each layer
};

/// Runs the full-precision and partially quantized networks side by side.
/// Layers below quantized.size() use the quantized weights on the X~ path;
/// activation quantization (when configured) applies to every X~ input; with
/// `apply_block_resets`, X~ is overwritten by X at each block boundary.
ForwardPair forward_pair(const NetworkSpec& spec, const Matrix& x0,
                         std::span<const QuantizedLayer> quantized, bool apply_block_resets = true);

/// Mean over rows of |Y_i - Y~_i| / |Y_i| (rows with Y_i = 0 are skipped).
double relative_error(const Matrix& y, const Matrix& yt);

struct PropagationReport {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<double> relative_errors;  ///< per layer output, deployed model
  std::vector<double> objectives;       ///< per layer calibration objective
  std::vector<double> lambdas;          ///< damping used per layer
};

struct NetworkQuantOptions {
  /// nullopt leaves the weights in full precision.
  std::optional<Method> method = Method::qronos;
  /// nullopt: the method's default damping (see default_damping).
  std::optional<DampingPolicy> damping;
  bool order_by_diag = true;
};

struct NetworkQuantResult {
  std::vector<QuantizedLayer> layers;
  PropagationReport report;
};

/// Default damping of each method: 1% mean diagonal for OPTQ, alpha*sigma1
/// (alpha = 1e-6, or 1e-3 when activations are quantized) for Qronos, none
/// for GPFQ and RTN.
DampingPolicy default_damping(Method method, bool activation_quantized);

/// Quantizes layer by layer. Layer l is calibrated on the (X, X~) pair at its
/// depth, so X~ carries the error of layers 0..l-1 (reset at block starts).
NetworkQuantResult quantize_network(const NetworkSpec& spec, const Matrix& calib_input,
                                    const NetworkQuantOptions& opts);

/// Fast Walsh-Hadamard transform of v in place (unnormalized).
void fwht(std::span<double> v);

struct RotatedPair {
  Matrix w;
  Matrix x;
};

/// X' = X H/sqrt(n), W' = (H/sqrt(n))^T W, so X'W' = XW.
RotatedPair hadamard_rotate(const Matrix& w, const Matrix& x);
/// Rotates the rows of X only.
Matrix hadamard_rotate_rows(const Matrix& x);

bool is_power_of_two(std::size_t n);

}  // namespace qronos
