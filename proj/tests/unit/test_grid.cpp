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
#include <random>

#include "qronos/error.hpp"
#include "qronos/grid.hpp"

using namespace qronos;

TEST(Grid, MinMaxExamples) {
  const Vector a{-1.0, 0.5};
  QuantGrid g = grid_from_minmax(a, 4);
  EXPECT_DOUBLE_EQ(g.step_size, 0.5);
  EXPECT_DOUBLE_EQ(g.zero_point, 2.0);

  const Vector b{0.0, 3.0};
  g = grid_from_minmax(b, 4);
  EXPECT_DOUBLE_EQ(g.step_size, 1.0);
  EXPECT_DOUBLE_EQ(g.zero_point, 0.0);

  const Vector c{-1.0, 1.0};
  g = grid_from_minmax(c, 4, 0.8);
  EXPECT_NEAR(g.step_size, 0.8 * 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(g.zero_point, 1.5, 1e-12);
}

TEST(Grid, DegenerateAndEmpty) {
  const Vector w{2.5, 2.5};
  const QuantGrid g = grid_from_minmax(w, 4);
  EXPECT_TRUE(g.degenerate);
  EXPECT_EQ(g.step_size, 1.0);
  EXPECT_EQ(g.zero_point, -2.5);
  EXPECT_EQ(quantize_rtn(2.5, g), 2.5);
  EXPECT_THROW(grid_from_minmax(Vector{}, 4), ShapeError);
}

TEST(Grid, RtnExamples) {
  QuantGrid g;
  g.levels = 4;
  g.step_size = 0.5;
  g.zero_point = 2.0;
  EXPECT_DOUBLE_EQ(quantize_rtn(-0.3, g), -0.5);
  EXPECT_DOUBLE_EQ(quantize_rtn(-5.0, g), -1.0);
  for (double v : g.alphabet()) EXPECT_EQ(quantize_rtn(v, g), v);
}

TEST(Grid, RtnIntegerGrid) {
  QuantGrid g;
  g.levels = 4;
  EXPECT_DOUBLE_EQ(quantize_rtn(2.4, g), 2.0);
  EXPECT_DOUBLE_EQ(quantize_rtn(2.5, g), 3.0);  // half away from zero
  EXPECT_DOUBLE_EQ(quantize_rtn(9.0, g), 3.0);
}

TEST(Grid, RoundHalfAway) {
  EXPECT_EQ(round_half_away(0.5), 1.0);
  EXPECT_EQ(round_half_away(-0.5), -1.0);
  EXPECT_EQ(round_half_away(1.49), 1.0);
}

TEST(Grid, LevelsForBits) {
  EXPECT_EQ(levels_for_bits(1.58), 3);
  EXPECT_EQ(levels_for_bits(2), 4);
  EXPECT_EQ(levels_for_bits(4), 16);
}

TEST(Grid, MinMaxEndpointsRepresentable) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  Vector w(50);
  for (double& v : w) v = n(rng);
  const QuantGrid g = grid_from_minmax(w, 16);
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  EXPECT_NEAR(quantize_rtn(*lo, g), *lo, 1e-12);
  EXPECT_NEAR(quantize_rtn(*hi, g), *hi, 1e-12);
  for (double v : w) EXPECT_LE(std::abs(quantize_rtn(v, g) - v), g.step_size / 2 + 1e-12);
}

TEST(Grid, SymmetricSearchExamples) {
  const Vector w{1.0, -1.0};
  const QuantGrid g = symmetric_scale_search(w, 3);
  EXPECT_EQ(quantize_rtn(1.0, g), 1.0);
  EXPECT_EQ(quantize_rtn(-1.0, g), -1.0);

  const Vector on{2.0, -2.0, 0.0, 2.0};
  const QuantGrid exact = symmetric_scale_search(on, 3);
  for (double v : on) EXPECT_EQ(quantize_rtn(v, exact), v);

  const QuantGrid zero = symmetric_scale_search(Vector{0.0, 0.0}, 4);
  EXPECT_TRUE(zero.degenerate);
  EXPECT_EQ(zero.step_size, 1.0);
}

TEST(Grid, SymmetricSearchBeatsMaxAbs) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  Vector w(256);
  for (double& v : w) v = n(rng);
  const QuantGrid g = symmetric_scale_search(w, 16);
  double maxabs = 0.0;
  for (double v : w) maxabs = std::max(maxabs, std::abs(v));
  QuantGrid base;
  base.levels = 16;
  base.symmetric = true;
  base.step_size = 2 * maxabs / 15;
  base.zero_point = 7.5;
  double e_search = 0.0, e_base = 0.0;
  for (double v : w) {
    e_search += std::pow(quantize_rtn(v, g) - v, 2);
    e_base += std::pow(quantize_rtn(v, base) - v, 2);
  }
  EXPECT_LE(e_search, e_base);
}

TEST(Grid, PerTokenExamples) {
  Matrix x{{0, 1, 2, 3}, {5, 5, 5, 5}};
  const Matrix q = quantize_per_token(x, 4);
  EXPECT_EQ(q, x);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  Matrix r(3, 40);
  for (double& v : r.data()) v = n(rng);
  const Matrix rq = quantize_per_token(r, 16);
  for (std::size_t i = 0; i < r.rows(); ++i) {
    const Vector row(r.row(i).begin(), r.row(i).end());
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    const double s = (*hi - *lo) / 15;
    for (std::size_t j = 0; j < r.cols(); ++j) EXPECT_LE(std::abs(rq(i, j) - r(i, j)), s / 2 + 1e-12);
  }
}
