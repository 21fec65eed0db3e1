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
#include <string>
#include <vector>

#include "qronos/grid.hpp"
#include "qronos/matrix.hpp"

namespace qronos::verify {

/// One seeded random problem: X (m x N), X~, a weight column and its grid.
struct Instance {
  Matrix x;
  Matrix xt;
  Vector w;
  QuantGrid grid;
};

/// Trial i of the default family: N = {4,8,16,32}[i % 4],
/// levels = {3,4,16}[(i / 4) % 3], m = 8N. X is standard Gaussian and
/// X~ = X + 0.1 * noise (or X~ = X when `mismatched` is false).
Instance make_instance(std::uint64_t seed, std::size_t trial, bool mismatched);
/// Same, with explicit sizes.
Instance make_instance(std::uint64_t seed, std::size_t trial, std::size_t n, int levels,
                       std::size_t m, bool mismatched);

/// max|a - b| / max|a| (absolute when a is all zeros).
double relative_deviation(std::span<const double> a, std::span<const double> b);

struct PropertyResult {
  std::string name;
  bool passed = true;
  std::size_t checks = 0;
  std::size_t failures = 0;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  bool passed = true;
  int trials = 0;
  std::uint64_t seed = 0;
  std::vector<PropertyResult> properties;
  std::string note;  ///< "0 trials" for a vacuous run
  double seconds = 0.0;
};

struct SuiteOptions {
  std::optional<int> trials;   ///< suite default when unset
  std::optional<double> tol;   ///< suite default when unset
  std::uint64_t seed = 0;
};

/// theorem1, lemma1, corollary1, propE2, lemmaC, orthogonality, oracle,
/// collapse, streaming.
const std::vector<std::string>& suite_names();
int default_trials(const std::string& suite);
double default_tolerance(const std::string& suite);

/// Runs one named suite. Throws UsageError for an unknown name.
SuiteResult run_suite(const std::string& suite, const SuiteOptions& opts);
/// "all" expands to every suite.
std::vector<SuiteResult> run_suites(const std::string& suite, const SuiteOptions& opts);

}  // namespace qronos::verify
