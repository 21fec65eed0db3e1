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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qronos::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kIo = 3,
  kShape = 4,
  kNumerical = 5,
  kVerifyFailed = 6,
};

struct QuantizeOptions {
  std::string weights;
  std::string calib_x, calib_xt;
  std::string stats_h, stats_g;
  std::string method = "qronos";
  std::optional<double> bits;
  std::optional<int> levels;
  double beta = 1.0;
  bool symmetric = false;
  std::string damping;  ///< empty: the method's default
  std::optional<double> alpha;
  std::string order = "diag";
  std::string out;
  std::string report;
  bool trace = false;
  std::uint64_t seed = 0;
};

struct StatsOptions {
  std::string calib_x, calib_xt;
  std::size_t batch = 256;
  std::string out_h, out_g;
};

struct RandomOptions {
  std::size_t rows = 0, cols = 0;
  double scale = 1.0;
  std::string dtype = "f64";
  std::uint64_t seed = 0;
  std::string out;
};

struct VerifyOptions {
  std::string suite = "all";
  std::optional<int> trials;
  std::optional<double> tol;
  std::uint64_t seed = 0;
  std::string out;
};

struct BenchOptions {
  std::size_t k_min = 32, k_max = 1024, m = 10000;
  int seeds = 3, reps = 3, levels = 16;
  std::string methods = "optq,gpfq,qronos,qronos-base";
  std::string dtype = "f64";
  std::uint64_t seed = 0;
  std::string out;
};

struct SimulateOptions {
  std::size_t layers = 4, width = 64, blocks = 1, calib_rows = 256;
  int wlevels = 3;
  std::string alevels = "off";
  double beta = 1.0;
  std::string methods = "rtn,optq,gpfq,qronos";
  int seeds = 10;
  std::string hadamard = "off";
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_quantize(const QuantizeOptions& o);
int cmd_stats(const StatsOptions& o);
int cmd_random(const RandomOptions& o);
int cmd_verify(const VerifyOptions& o);
int cmd_bench(const BenchOptions& o);
int cmd_simulate(const SimulateOptions& o);

std::vector<std::string> split_list(const std::string& s);

}  // namespace qronos::cli
