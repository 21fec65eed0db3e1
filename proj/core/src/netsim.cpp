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
#include "qronos/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qronos/calib.hpp"
#include "qronos/error.hpp"

namespace qronos {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void NetworkSpec::validate() const {
  if (layers.empty()) throw UsageError("network has no layers");
  if (weight_grids.size() != layers.size())
    throw ShapeError("network: " + std::to_string(weight_grids.size()) + " grid configs for " +
                     std::to_string(layers.size()) + " layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Matrix& w = layers[l].weight;
    if (w.empty()) throw ShapeError("layer " + std::to_string(l) + " has an empty weight");
    if (l > 0 && layers[l - 1].weight.cols() != w.rows())
      throw ShapeError("layer " + std::to_string(l) + " expects " + std::to_string(w.rows()) +
                       " inputs but layer " + std::to_string(l - 1) + " produces " +
                       std::to_string(layers[l - 1].weight.cols()));
    if (layers[l].hadamard && !is_power_of_two(w.rows()))
      throw ShapeError("layer " + std::to_string(l) + ": Hadamard rotation needs a power-of-two width, got " +
                       std::to_string(w.rows()));
    if (weight_grids[l].levels < 2) throw UsageError("weight grids need at least 2 levels");
  }
  for (std::size_t i = 0; i < block_boundaries.size(); ++i) {
    if (block_boundaries[i] >= layers.size())
      throw UsageError("block boundary " + std::to_string(block_boundaries[i]) + " out of range");
    if (i > 0 && block_boundaries[i] <= block_boundaries[i - 1])
      throw UsageError("block boundaries must be strictly increasing");
  }
  if (act_levels && *act_levels < 2) throw UsageError("activation quantization needs >= 2 levels");
}

bool NetworkSpec::is_block_start(std::size_t layer) const {
  return std::binary_search(block_boundaries.begin(), block_boundaries.end(), layer);
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

NetworkSpec make_random_network(const RandomNetworkOptions& opts) {
  if (opts.layers == 0 || opts.width == 0) throw UsageError("network needs layers and width > 0");
  if (opts.blocks == 0 || opts.blocks > opts.layers)
    throw UsageError("blocks must lie in [1, layers]");
  NetworkSpec spec;
  spec.seed = opts.seed;
  spec.act_levels = opts.act_levels;
  const double scale = 1.0 / std::sqrt(static_cast<double>(opts.width));
  for (std::size_t l = 0; l < opts.layers; ++l) {
    LayerDef layer;
    layer.weight = scale * gaussian_matrix(opts.width, opts.width, opts.seed * 1000003ULL + l + 1);
    layer.activation = l + 1 < opts.layers ? Activation::relu : Activation::none;
    layer.hadamard = opts.hadamard;
    spec.layers.push_back(std::move(layer));
    spec.weight_grids.push_back({opts.weight_levels, opts.beta, false});
  }
  const std::size_t per_block = opts.layers / opts.blocks;
  for (std::size_t b = 0; b < opts.blocks; ++b) spec.block_boundaries.push_back(b * per_block);
  spec.validate();
  return spec;
}

void fwht(std::span<double> v) {
  const std::size_t n = v.size();
  if (!is_power_of_two(n)) throw ShapeError("fwht: length " + std::to_string(n) + " is not a power of two");
  for (std::size_t len = 1; len < n; len <<= 1)
    for (std::size_t i = 0; i < n; i += len << 1)
      for (std::size_t j = i; j < i + len; ++j) {
        const double a = v[j];
        const double b = v[j + len];
        v[j] = a + b;
        v[j + len] = a - b;
      }
}

Matrix hadamard_rotate_rows(const Matrix& x) {
  Matrix out = x;
  const double scale = 1.0 / std::sqrt(static_cast<double>(x.cols()));
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = out.row(r);
    fwht(row);
    for (double& v : row) v *= scale;
  }
  return out;
}

RotatedPair hadamard_rotate(const Matrix& w, const Matrix& x) {
  if (x.cols() != w.rows())
    throw ShapeError("hadamard_rotate: X has " + std::to_string(x.cols()) + " columns, W has " +
                     std::to_string(w.rows()) + " rows");
  // H is symmetric, so H^T W rotates each column of W the same way.
  Matrix wt = hadamard_rotate_rows(w.transpose());
  return {wt.transpose(), hadamard_rotate_rows(x)};
}

namespace {

void apply_activation(Matrix& m, Activation act) {
  if (act == Activation::relu)
    for (double& v : m.data()) v = std::max(v, 0.0);
}

Matrix layer_forward(const Matrix& input, const LayerDef& layer, const QuantizedLayer* q) {
  Matrix out;
  if (!q) {
    out = matmul(input, layer.weight);
  } else if (q->rotated) {
    out = matmul(hadamard_rotate_rows(input), q->weight);
  } else {
    out = matmul(input, q->weight);
  }
  apply_activation(out, layer.activation);
  return out;
}

}  // namespace

ForwardPair forward_pair(const NetworkSpec& spec, const Matrix& x0,
                         std::span<const QuantizedLayer> quantized, bool apply_block_resets) {
  spec.validate();
  if (x0.cols() != spec.layers.front().weight.rows())
    throw ShapeError("forward_pair: input has " + std::to_string(x0.cols()) +
                     " columns, first layer expects " + std::to_string(spec.layers.front().weight.rows()));
  if (quantized.size() > spec.layers.size()) throw ShapeError("forward_pair: too many quantized layers");
  ForwardPair fp;
  Matrix x = x0;
  Matrix xt = x0;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    if (apply_block_resets && spec.is_block_start(l)) xt = x;
    if (spec.act_levels) xt = quantize_per_token(xt, *spec.act_levels);
    const QuantizedLayer* q = l < quantized.size() ? &quantized[l] : nullptr;
    if (q) require_shape(q->weight, spec.layers[l].weight.rows(), spec.layers[l].weight.cols(),
                         "quantized weight of layer " + std::to_string(l));
    Matrix y = layer_forward(x, spec.layers[l], nullptr);
    Matrix yt = layer_forward(xt, spec.layers[l], q);
    fp.x.push_back(std::move(x));
    fp.xt.push_back(std::move(xt));
    x = y;
    xt = yt;
    fp.y.push_back(std::move(y));
    fp.yt.push_back(std::move(yt));
  }
  return fp;
}

double relative_error(const Matrix& y, const Matrix& yt) {
  require_shape(yt, y.rows(), y.cols(), "relative_error");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto a = y.row(r);
    auto b = yt.row(r);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      num += (a[j] - b[j]) * (a[j] - b[j]);
      den += a[j] * a[j];
    }
    if (den == 0.0) continue;
    sum += std::sqrt(num / den);
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

DampingPolicy default_damping(Method method, bool activation_quantized) {
  switch (method) {
    case Method::optq:
    case Method::optq_ref: return damping_mean_diag();
    case Method::qronos:
    case Method::qronos_base: return damping_top_singular(activation_quantized ? 1e-3 : 1e-6);
    case Method::gpfq:
    case Method::rtn: return DampingPolicy{};
  }
  return DampingPolicy{};
}

namespace {

std::vector<QuantGrid> grids_for(const Matrix& w, const WeightGridConfig& cfg) {
  std::vector<QuantGrid> grids;
  grids.reserve(w.cols());
  for (std::size_t c = 0; c < w.cols(); ++c) {
    const Vector col = w.column(c);
    grids.push_back(cfg.symmetric ? symmetric_scale_search(col, cfg.levels)
                                  : grid_from_minmax(col, cfg.levels, cfg.beta));
  }
  return grids;
}

}  // namespace

NetworkQuantResult quantize_network(const NetworkSpec& spec, const Matrix& calib_input,
                                    const NetworkQuantOptions& opts) {
  spec.validate();
  if (calib_input.cols() != spec.layers.front().weight.rows())
    throw ShapeError("quantize_network: calibration input has " + std::to_string(calib_input.cols()) +
                     " columns, first layer expects " + std::to_string(spec.layers.front().weight.rows()));
  NetworkQuantResult res;
  res.report.method = opts.method ? to_string(*opts.method) : "fp";
  res.report.seed = spec.seed;

  Matrix x = calib_input;
  Matrix xt = calib_input;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const LayerDef& layer = spec.layers[l];
    if (spec.is_block_start(l)) xt = x;
    if (spec.act_levels) xt = quantize_per_token(xt, *spec.act_levels);

    QuantizedLayer ql;
    ql.rotated = layer.hadamard;
    Matrix xin = x, xtin = xt, w = layer.weight;
    if (layer.hadamard) {
      RotatedPair rp = hadamard_rotate(layer.weight, x);
      w = std::move(rp.w);
      xin = std::move(rp.x);
      xtin = hadamard_rotate_rows(xt);
    }

    if (!opts.method) {
      ql.weight = w;
      double obj = 0.0;
      for (std::size_t c = 0; c < w.cols(); ++c) {
        const Vector col = w.column(c);
        obj += residual_objective(col, col, xin, xtin);
      }
      res.report.objectives.push_back(obj);
      res.report.lambdas.push_back(0.0);
    } else {
      LayerQuantRequest req;
      req.W = w;
      req.stats = accumulate_all(xin, xtin);
      req.grids = grids_for(w, spec.weight_grids[l]);
      req.damping = opts.damping ? *opts.damping : default_damping(*opts.method, spec.act_levels.has_value());
      req.method = *opts.method;
      req.order_by_diag = opts.order_by_diag;
      req.x = &xin;
      req.xt = &xtin;
      LayerQuantResult lr = quantize_layer(req);
      ql.weight = std::move(lr.Q);
      res.report.objectives.push_back(lr.report.total_objective);
      res.report.lambdas.push_back(lr.report.damping.resolved_lambda);
    }

    Matrix y = layer_forward(x, layer, nullptr);
    Matrix yt = layer_forward(xt, layer, &ql);
    x = std::move(y);
    xt = std::move(yt);
    res.layers.push_back(std::move(ql));
  }

  const ForwardPair deployed = forward_pair(spec, calib_input, res.layers, false);
  for (std::size_t l = 0; l < spec.layers.size(); ++l)
    res.report.relative_errors.push_back(relative_error(deployed.y[l], deployed.yt[l]));
  return res;
}

}  // namespace qronos
