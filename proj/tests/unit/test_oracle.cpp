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
#include "qronos/oracle.hpp"
#include "qronos/rounding.hpp"
#include "qronos/verify.hpp"

using namespace qronos;

namespace {

QuantGrid integer_grid(int levels) {
  QuantGrid g;
  g.levels = levels;
  return g;
}

}  // namespace

TEST(BruteForce, OnGridIsExact) {
  const Matrix x = gaussian_matrix(12, 3, 1);
  const Vector w{1, 0, 3};
  const oracle::IlsSolution s = oracle::brute_force_ils(w, x, x, integer_grid(4));
  EXPECT_EQ(s.q, w);
  EXPECT_EQ(s.codes, (std::vector<int>{1, 0, 3}));
  EXPECT_NEAR(s.objective, 0.0, 1e-24);
}

TEST(BruteForce, ScalarCase) {
  Matrix x{{1.0}, {2.0}};
  Matrix xt{{1.5}, {1.0}};
  const Vector w{1.3};
  const oracle::IlsSolution s = oracle::brute_force_ils(w, x, xt, integer_grid(4));
  // minimizer of |X w - X~ p|^2 over p in {0,1,2,3}: p* = <Xw, X~>/|X~|^2 = 1.3*3.5/3.25 = 1.4
  EXPECT_EQ(s.q, (Vector{1.0}));
}

TEST(BruteForce, Cap) {
  const Matrix x = gaussian_matrix(30, 12, 2);
  const Vector w(12, 0.5);
  try {
    oracle::brute_force_ils(w, x, x, integer_grid(16), 1000);
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("16^12"), std::string::npos);
  }
}

TEST(BruteForce, DominatesGreedy) {
  for (std::size_t trial = 0; trial < 40; ++trial) {
    const verify::Instance in = verify::make_instance(9, trial, 4, 4, 32, true);
    const oracle::IlsSolution s = oracle::brute_force_ils(in.w, in.x, in.xt, in.grid);
    const Matrix h = matmul_tn(in.xt, in.xt), g = matmul_tn(in.xt, in.x);
    const std::vector<Vector> qs{
        quantize_rtn(in.w, in.grid),
        quantize_optq_column(in.w, inverse_hessian_factor(h), in.grid).q,
        quantize_gpfq_column(in.w, in.x, in.xt, in.grid).q,
        quantize_qronos_column(in.w, h, g, inverse_hessian_factor(h), in.grid).q,
    };
    for (const Vector& q : qs) EXPECT_LE(s.objective, residual_objective(in.w, q, in.x, in.xt) + 1e-12);
  }
}

TEST(Stepwise, UnclippedMatchesClosedForm) {
  const Matrix x = gaussian_matrix(20, 3, 3);
  const Vector w{1.2, 0.7, 2.1};
  oracle::StepState st{oracle::StepRule::qronos, w, w};
  const oracle::StepChoice c = oracle::stepwise_argmin(st, x, x, integer_grid(4), 0);
  // With X~ = X and the current state equal to w, the residual vanishes and
  // the closed-form ratio is w_0 itself.
  EXPECT_EQ(c.value, 1.0);
}

TEST(Stepwise, ClipsAtEdge) {
  const Matrix x = gaussian_matrix(20, 2, 4);
  const Vector w{9.0, 0.0};
  oracle::StepState st{oracle::StepRule::gpfq, w, w};
  EXPECT_EQ(oracle::stepwise_argmin(st, x, x, integer_grid(4), 0).value, 3.0);
  const Vector neg{-4.0, 0.0};
  st = {oracle::StepRule::optq, neg, neg};
  EXPECT_EQ(oracle::stepwise_argmin(st, x, x, integer_grid(4), 0).value, 0.0);
}

TEST(Stepwise, AgreesWithRoundingSelections) {
  std::size_t disagreements = 0;
  for (std::size_t trial = 0; trial < 200; ++trial) {
    const verify::Instance in = verify::make_instance(5, trial, 6, 4, 48, true);
    const Matrix h = matmul_tn(in.xt, in.xt), g = matmul_tn(in.xt, in.x);
    const RoundingTrace tr = quantize_qronos_base_column(in.w, h, g, in.grid, true);
    const std::size_t t = trial % 6;
    oracle::StepState st{oracle::StepRule::qronos, in.w, tr.w_states[t]};
    const oracle::StepChoice c = oracle::stepwise_argmin(st, in.x, in.xt, in.grid, t);
    disagreements += c.value != tr.q[t];
  }
  EXPECT_EQ(disagreements, 0u);
}

TEST(DirectLstsq, Examples) {
  const Vector b{1, 2, 3};
  const Vector s = oracle::direct_lstsq(Matrix::identity(3), b);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(s[i], b[i], 1e-14);

  Matrix a{{1, 0}, {0, 1}, {1, 1}};
  const Vector c = oracle::direct_lstsq(a, Vector{2, 3, 5});
  EXPECT_NEAR(c[0], 2.0, 1e-13);
  EXPECT_NEAR(c[1], 3.0, 1e-13);
}

TEST(DirectLstsq, ResidualOrthogonal) {
  const Matrix a = gaussian_matrix(30, 5, 6);
  const Vector b = gaussian_matrix(30, 1, 7).column(0);
  const Vector v = oracle::direct_lstsq(a, b);
  const Vector av = matvec(a, v);
  Vector r(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) r[i] = b[i] - av[i];
  for (std::size_t j = 0; j < 5; ++j) EXPECT_LE(std::abs(dot(r, a.column(j))), 1e-10);
}

TEST(DirectLstsq, RidgeMatchesNormalEquations) {
  const Matrix a = gaussian_matrix(10, 4, 8);
  const Vector b = gaussian_matrix(10, 1, 9).column(0);
  const Vector v = oracle::direct_lstsq(a, b, 0.7);
  Matrix n = matmul_tn(a, a);
  for (std::size_t i = 0; i < 4; ++i) n(i, i) += 0.7;
  const Vector lhs = matvec(n, v);
  Vector atb(4, 0.0);
  for (std::size_t j = 0; j < 4; ++j) atb[j] = dot(a.column(j), b);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(lhs[j], atb[j], 1e-10);
}

TEST(Reference, PseudoinverseTraceShape) {
  const verify::Instance in = verify::make_instance(1, 2, true);
  const oracle::ReferenceTrace tr = oracle::qronos_pinv_reference(in.w, in.x, in.xt, in.grid);
  EXPECT_EQ(tr.w_states.size(), in.w.size() + 1);
  EXPECT_EQ(tr.w_states.back(), tr.q);
}
