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

#include "qronos/error.hpp"
#include "qronos/verify.hpp"

using namespace qronos;

TEST(Verify, InstanceFamily) {
  const verify::Instance a = verify::make_instance(0, 0, true);
  EXPECT_EQ(a.w.size(), 4u);
  EXPECT_EQ(a.x.rows(), 32u);
  EXPECT_EQ(a.grid.levels, 3);
  const verify::Instance b = verify::make_instance(0, 7, false);
  EXPECT_EQ(b.w.size(), 32u);
  EXPECT_EQ(b.grid.levels, 4);
  EXPECT_EQ(b.x, b.xt);
  EXPECT_EQ(verify::make_instance(0, 9, true).grid.levels, 16);
  EXPECT_EQ(verify::make_instance(3, 5, true).x, verify::make_instance(3, 5, true).x);
}

TEST(Verify, RelativeDeviation) {
  EXPECT_EQ(verify::relative_deviation(Vector{2, -4}, Vector{2, -4}), 0.0);
  EXPECT_DOUBLE_EQ(verify::relative_deviation(Vector{2, -4}, Vector{2, -3}), 0.25);
  EXPECT_DOUBLE_EQ(verify::relative_deviation(Vector{0, 0}, Vector{0, 1e-3}), 1e-3);
}

TEST(Verify, EverySuitePassesSmall) {
  verify::SuiteOptions opts;
  opts.trials = 12;
  opts.seed = 5;
  for (const auto& r : verify::run_suites("all", opts)) {
    EXPECT_TRUE(r.passed) << r.suite;
    EXPECT_FALSE(r.properties.empty()) << r.suite;
    for (const auto& p : r.properties) EXPECT_GT(p.checks, 0u) << r.suite << ": " << p.name;
  }
}

TEST(Verify, ZeroTrialsIsVacuous) {
  verify::SuiteOptions opts;
  opts.trials = 0;
  const verify::SuiteResult r = verify::run_suite("theorem1", opts);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.note, "0 trials");
}

TEST(Verify, ImpossibleToleranceFails) {
  // A negative control: with zero tolerance the floating-point w_states of
  // two different algorithms cannot agree bit for bit on every trial.
  verify::SuiteOptions opts;
  opts.trials = 20;
  opts.tol = 0.0;
  const verify::SuiteResult r = verify::run_suite("theorem1", opts);
  EXPECT_FALSE(r.passed);
}

TEST(Verify, UnknownSuite) {
  EXPECT_THROW(verify::run_suite("nope", {}), UsageError);
  EXPECT_THROW(verify::run_suite("theorem1", {-1, std::nullopt, 0}), UsageError);
}

TEST(Verify, Deterministic) {
  verify::SuiteOptions opts;
  opts.trials = 8;
  const auto a = verify::run_suite("theorem1", opts);
  const auto b = verify::run_suite("theorem1", opts);
  ASSERT_EQ(a.properties.size(), b.properties.size());
  for (std::size_t i = 0; i < a.properties.size(); ++i)
    EXPECT_EQ(a.properties[i].max_deviation, b.properties[i].max_deviation);
}
