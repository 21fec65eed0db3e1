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
#include <string>
#include <vector>

#include "qronos/qmx.hpp"
#include "qronos/rounding.hpp"

namespace qronos::bench {

struct BenchConfig {
  std::size_t k_min = 32;
  std::size_t k_max = 1024;
  std::size_t m = 10000;
  int seeds = 3;
  int reps = 3;  ///< inner repetitions per cell; the minimum is reported
  int levels = 16;
  std::vector<Method> methods{Method::optq, Method::gpfq, Method::qronos, Method::qronos_base};
  /// Precision of the generated calibration data. Arithmetic stays 64-bit.
  Dtype dtype = Dtype::f64;
  std::uint64_t base_seed = 0;
};

/// Doubling ladder k_min, 2*k_min, ... <= k_max.
std::vector<std::size_t> k_ladder(std::size_t k_min, std::size_t k_max);

struct CellTiming {
  Method method = Method::qronos;
  std::size_t k = 0;
  int seed = 0;
  bool skipped = false;
  std::string skip_reason;
  double algorithm_min = 0.0;  ///< seconds
  double algorithm_mean = 0.0;
  double end_to_end_min = 0.0;
  double end_to_end_mean = 0.0;
};

struct MethodSummary {
  Method method = Method::qronos;
  std::size_t k = 0;
  bool skipped = false;
  double algorithm_mean = 0.0;    ///< mean over seeds of per-seed minima
  double algorithm_median = 0.0;
  double end_to_end_mean = 0.0;
  double end_to_end_median = 0.0;
  double algorithm_normalized = 0.0;   ///< algorithm_mean / OPTQ at the smallest K
  double end_to_end_normalized = 0.0;
};

struct SpeedupSummary {
  std::size_t k = 0;
  double median = 0.0;  ///< median over seeds of base/efficient algorithm time
  double min = 0.0;
  double max = 0.0;
};

struct BenchReport {
  BenchConfig config;
  std::vector<std::size_t> ladder;
  std::vector<CellTiming> cells;
  std::vector<MethodSummary> summaries;
  std::vector<SpeedupSummary> speedups;  ///< empty unless both qronos forms ran
  double baseline_algorithm = 0.0;
  double baseline_end_to_end = 0.0;
  std::string machine;
};

/// Times every (method, K, seed) cell serially. A layer has K inputs and
/// K/4 outputs; calibration data is seeded standard Gaussian X with
/// X~ = X + 0.1 * noise. Allocation failures mark the cell skipped.
BenchReport run_bench(const BenchConfig& config);

std::string machine_descriptor();

}  // namespace qronos::bench
