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
#include <gtest/gtest.h>

#include <cmath>

#include "qronos/calib.hpp"
#include "qronos/error.hpp"
#include "qronos/netsim.hpp"
#include "qronos/rounding.hpp"

using namespace qronos;

namespace {

NetworkSpec small_net(std::size_t layers = 3, std::size_t blocks = 1) {
  RandomNetworkOptions o;
  o.layers = layers;
  o.width = 16;
  o.blocks = blocks;
  o.weight_levels = 4;
  o.seed = 42;
  return make_random_network(o);
}

}  // namespace

TEST(Network, RandomIsValidAndSeeded) {
  const NetworkSpec a = small_net();
  EXPECT_NO_THROW(a.validate());
  const NetworkSpec b = small_net();
  for (std::size_t l = 0; l < a.layers.size(); ++l) EXPECT_EQ(a.layers[l].weight, b.layers[l].weight);
  EXPECT_EQ(a.layers.back().activation, Activation::none);
  EXPECT_EQ(a.layers.front().activation, Activation::relu);
}

TEST(Network, Validation) {
  NetworkSpec s = small_net();
  s.layers[1].weight = Matrix(5, 16);
  EXPECT_THROW(s.validate(), ShapeError);
  s = small_net();
  s.block_boundaries = {7};
  EXPECT_THROW(s.validate(), UsageError);
  s = small_net();
  s.layers[0].weight = Matrix(12, 16);
  s.layers[0].hadamard = true;
  EXPECT_THROW(s.validate(), ShapeError);
}

TEST(ForwardPair, NoQuantizationIsIdentity) {
  const NetworkSpec s = small_net();
  const Matrix x0 = gaussian_matrix(10, 16, 1);
  const ForwardPair fp = forward_pair(s, x0, {});
  for (std::size_t l = 0; l < s.layers.size(); ++l) {
    EXPECT_EQ(fp.x[l], fp.xt[l]);
    EXPECT_EQ(fp.y[l], fp.yt[l]);
    EXPECT_EQ(relative_error(fp.y[l], fp.yt[l]), 0.0);
  }
}

TEST(ForwardPair, OnGridWeightsGiveZeroError) {
  NetworkSpec s = small_net();
  std::vector<QuantizedLayer> q;
  for (auto& layer : s.layers) {
    for (double& v : layer.weight.data()) v = std::round(v * 4) / 4;
    q.push_back({layer.weight, false});
  }
  const ForwardPair fp = forward_pair(s, gaussian_matrix(10, 16, 2), q);
  for (std::size_t l = 0; l < s.layers.size(); ++l) EXPECT_EQ(fp.y[l], fp.yt[l]);
}

TEST(ForwardPair, IdentitySecondLayerCarriesError) {
  NetworkSpec s;
  s.layers.push_back({gaussian_matrix(8, 8, 3), Activation::none, false});
  s.layers.push_back({Matrix::identity(8), Activation::none, false});
  s.weight_grids = {WeightGridConfig{}, WeightGridConfig{}};
  Matrix q0 = s.layers[0].weight;
  for (double& v : q0.data()) v = std::round(v);
  const std::vector<QuantizedLayer> q{{q0, false}};
  const ForwardPair fp = forward_pair(s, gaussian_matrix(6, 8, 4), q);
  EXPECT_EQ(fp.y[0], fp.y[1]);
  EXPECT_EQ(fp.yt[0], fp.yt[1]);
  EXPECT_EQ(relative_error(fp.y[0], fp.yt[0]), relative_error(fp.y[1], fp.yt[1]));
}

TEST(ForwardPair, BlockResetRestoresX) {
  NetworkSpec s = small_net(4, 2);
  ASSERT_EQ(s.block_boundaries, (std::vector<std::size_t>{0, 2}));
  std::vector<QuantizedLayer> q;
  for (const auto& layer : s.layers) {
    Matrix w = layer.weight;
    for (double& v : w.data()) v = std::round(v * 2) / 2;
    q.push_back({w, false});
  }
  const ForwardPair fp = forward_pair(s, gaussian_matrix(10, 16, 5), q);
  EXPECT_EQ(fp.x[2], fp.xt[2]);
  EXPECT_NE(fp.x[1], fp.xt[1]);
}

TEST(ForwardPair, ActivationQuantization) {
  NetworkSpec s = small_net();
  s.act_levels = 4;
  const ForwardPair fp = forward_pair(s, gaussian_matrix(10, 16, 6), {});
  EXPECT_EQ(fp.xt[0], quantize_per_token(fp.x[0], 4));
}

TEST(QuantizeNetwork, RtnOnGridIsExact) {
  NetworkSpec s = small_net();
  for (auto& layer : s.layers) {
    Matrix& w = layer.weight;
    for (std::size_t c = 0; c < w.cols(); ++c)
      for (std::size_t r = 0; r < w.rows(); ++r) w(r, c) = static_cast<double>((r + c) % 4);
  }
  NetworkQuantOptions o;
  o.method = Method::rtn;
  const NetworkQuantResult r = quantize_network(s, gaussian_matrix(32, 16, 7), o);
  for (double e : r.report.relative_errors) EXPECT_EQ(e, 0.0);
}

TEST(QuantizeNetwork, FullPrecisionHasZeroError) {
  const NetworkSpec s = small_net();
  NetworkQuantOptions o;
  o.method = std::nullopt;
  const NetworkQuantResult r = quantize_network(s, gaussian_matrix(32, 16, 8), o);
  EXPECT_EQ(r.report.method, "fp");
  for (double e : r.report.relative_errors) EXPECT_EQ(e, 0.0);
}

TEST(QuantizeNetwork, SingleLayerObjectiveMatchesRounding) {
  NetworkSpec s;
  s.layers.push_back({gaussian_matrix(16, 4, 9), Activation::none, false});
  s.weight_grids = {WeightGridConfig{4, 1.0, false}};
  const Matrix x = gaussian_matrix(64, 16, 10);
  NetworkQuantOptions o;
  o.method = Method::qronos;
  const NetworkQuantResult r = quantize_network(s, x, o);

  LayerQuantRequest req;
  req.W = s.layers[0].weight;
  req.stats = accumulate_all(x, x);
  for (std::size_t c = 0; c < 4; ++c) req.grids.push_back(grid_from_minmax(req.W.column(c), 4));
  req.damping = default_damping(Method::qronos, false);
  req.x = &x;
  req.xt = &x;
  const LayerQuantResult lr = quantize_layer(req);
  EXPECT_EQ(r.report.objectives[0], lr.report.total_objective);
  EXPECT_EQ(r.layers[0].weight, lr.Q);
}

TEST(QuantizeNetwork, ReportShape) {
  const NetworkSpec s = small_net(3);
  NetworkQuantOptions o;
  o.method = Method::gpfq;
  const NetworkQuantResult r = quantize_network(s, gaussian_matrix(32, 16, 11), o);
  EXPECT_EQ(r.report.relative_errors.size(), 3u);
  EXPECT_EQ(r.report.objectives.size(), 3u);
  EXPECT_EQ(r.report.lambdas.size(), 3u);
  for (double e : r.report.relative_errors) EXPECT_GE(e, 0.0);
}

TEST(QuantizeNetwork, DefaultDamping) {
  EXPECT_EQ(default_damping(Method::optq, false).mode, DampingMode::mean_diag_percent);
  EXPECT_EQ(default_damping(Method::qronos, false).alpha, 1e-6);
  EXPECT_EQ(default_damping(Method::qronos, true).alpha, 1e-3);
  EXPECT_EQ(default_damping(Method::gpfq, false).mode, DampingMode::none);
}

TEST(Hadamard, SmallCases) {
  Vector one{3.0};
  fwht(one);
  EXPECT_EQ(one, (Vector{3.0}));
  Vector two{1.0, 2.0};
  fwht(two);
  EXPECT_EQ(two, (Vector{3.0, -1.0}));

  const Matrix w = gaussian_matrix(2, 3, 12);
  const Matrix x = gaussian_matrix(4, 2, 13);
  const RotatedPair rp = hadamard_rotate(w, x);
  const RotatedPair back = hadamard_rotate(rp.w, rp.x);  // H2/sqrt(2) is an involution
  for (std::size_t i = 0; i < w.data().size(); ++i) EXPECT_NEAR(back.w.data()[i], w.data()[i], 1e-15);
  for (std::size_t i = 0; i < x.data().size(); ++i) EXPECT_NEAR(back.x.data()[i], x.data()[i], 1e-15);
}

TEST(Hadamard, ProductInvariance) {
  const Matrix w = gaussian_matrix(64, 16, 14);
  const Matrix x = gaussian_matrix(32, 64, 15);
  const RotatedPair rp = hadamard_rotate(w, x);
  const Matrix ref = matmul(x, w);
  EXPECT_LE(frobenius_norm(matmul(rp.x, rp.w) - ref) / frobenius_norm(ref), 1e-10);
  EXPECT_EQ(hadamard_rotate_rows(x), rp.x);
  EXPECT_THROW(hadamard_rotate(gaussian_matrix(12, 2, 1), gaussian_matrix(3, 12, 2)), ShapeError);
}

TEST(Hadamard, RotatedNetworkRuns) {
  RandomNetworkOptions o;
  o.layers = 2;
  o.width = 16;
  o.hadamard = true;
  o.weight_levels = 8;
  const NetworkSpec s = make_random_network(o);
  NetworkQuantOptions q;
  q.method = Method::qronos;
  const NetworkQuantResult r = quantize_network(s, gaussian_matrix(64, 16, 3), q);
  EXPECT_TRUE(r.layers[0].rotated);
  for (double e : r.report.relative_errors) EXPECT_TRUE(std::isfinite(e));
}

TEST(Simulation, QronosOrderingSmall) {
  double sum_q = 0.0, sum_o = 0.0, sum_g = 0.0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    RandomNetworkOptions o;
    o.layers = 3;
    o.width = 32;
    o.weight_levels = 3;
    o.seed = seed;
    const NetworkSpec s = make_random_network(o);
    const Matrix x = gaussian_matrix(128, 32, seed + 100);
    NetworkQuantOptions q;
    q.method = Method::qronos;
    sum_q += quantize_network(s, x, q).report.relative_errors.back();
    q.method = Method::optq;
    sum_o += quantize_network(s, x, q).report.relative_errors.back();
    q.method = Method::gpfq;
    sum_g += quantize_network(s, x, q).report.relative_errors.back();
  }
  EXPECT_LE(sum_q, sum_o);
  EXPECT_LE(sum_q, sum_g);
}
