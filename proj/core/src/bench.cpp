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
#include "qronos/bench.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <new>
#include <numeric>
#include <thread>

#include "qronos/calib.hpp"
#include "qronos/error.hpp"
#include "qronos/grid.hpp"
#include "qronos/netsim.hpp"

namespace qronos::bench {

std::vector<std::size_t> k_ladder(std::size_t k_min, std::size_t k_max) {
  if (k_min < 4) throw UsageError("k-min must be at least 4 (layers have K/4 outputs)");
  if (k_max < k_min) throw UsageError("k-max must not be below k-min");
  std::vector<std::size_t> ks;
  for (std::size_t k = k_min; k <= k_max; k *= 2) ks.push_back(k);
  return ks;
}

std::string machine_descriptor() {
  std::string cpu = "unknown cpu";
  std::ifstream info("/proc/cpuinfo");
  for (std::string line; std::getline(info, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(colon + 2);
      break;
    }
  }
  return cpu + ", " + std::to_string(std::thread::hardware_concurrency()) + " hw threads";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

void round_to_f32(Matrix& m) {
  for (double& v : m.data()) v = static_cast<double>(static_cast<float>(v));
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct Instance {
  Matrix x, xt, w;
  std::vector<QuantGrid> grids;
};

Instance make_instance(std::size_t k, std::size_t m, int levels, Dtype dtype, std::uint64_t seed) {
  Instance in;
  in.x = gaussian_matrix(m, k, seed * 7919ULL + 1);
  in.xt = in.x + 0.1 * gaussian_matrix(m, k, seed * 7919ULL + 2);
  in.w = gaussian_matrix(k, k / 4, seed * 7919ULL + 3);
  if (dtype == Dtype::f32) {
    round_to_f32(in.x);
    round_to_f32(in.xt);
    round_to_f32(in.w);
  }
  for (std::size_t c = 0; c < in.w.cols(); ++c) in.grids.push_back(grid_from_minmax(in.w.column(c), levels));
  return in;
}

CellTiming time_cell(Method method, const Instance& in, int reps) {
  CellTiming cell;
  std::vector<double> alg, e2e;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    CalibStats stats = CalibStats::zeros(in.x.cols());
    if (method == Method::optq || method == Method::rtn) {
      // OPTQ only needs the Hessian of the layer input.
      accumulate_hessian(stats, in.xt);
    } else {
      accumulate(stats, in.x, in.xt);
    }
    const auto t1 = Clock::now();
    LayerQuantRequest req;
    req.W = in.w;
    req.stats = std::move(stats);
    req.grids = in.grids;
    req.damping = default_damping(method, false);
    req.method = method;
    req.compute_objectives = false;
    if (method == Method::optq_ref) req.xt = &in.xt;
    LayerQuantResult res = quantize_layer(req);
    const auto t2 = Clock::now();
    alg.push_back(seconds(t1, t2));
    e2e.push_back(seconds(t0, t2));
  }
  cell.algorithm_min = *std::min_element(alg.begin(), alg.end());
  cell.algorithm_mean = mean(alg);
  cell.end_to_end_min = *std::min_element(e2e.begin(), e2e.end());
  cell.end_to_end_mean = mean(e2e);
  return cell;
}

}  // namespace

BenchReport run_bench(const BenchConfig& config) {
  if (config.seeds < 1) throw UsageError("bench needs at least one seed");
  if (config.reps < 1) throw UsageError("bench needs at least one repetition");
  if (config.methods.empty()) throw UsageError("bench needs at least one method");
  BenchReport rep;
  rep.config = config;
  rep.ladder = k_ladder(config.k_min, config.k_max);
  rep.machine = machine_descriptor();

  for (std::size_t k : rep.ladder) {
    for (int s = 0; s < config.seeds; ++s) {
      Instance in;
      bool have_instance = true;
      try {
        in = make_instance(k, config.m, config.levels, config.dtype,
                           config.base_seed * 1000ULL + static_cast<std::uint64_t>(s) * 31ULL + k);
      } catch (const std::bad_alloc&) {
        have_instance = false;
      }
      for (Method method : config.methods) {
        CellTiming cell;
        if (have_instance) {
          try {
            cell = time_cell(method, in, config.reps);
          } catch (const std::bad_alloc&) {
            cell.skipped = true;
            cell.skip_reason = "skipped: resource";
          }
        } else {
          cell.skipped = true;
          cell.skip_reason = "skipped: resource";
        }
        cell.method = method;
        cell.k = k;
        cell.seed = s;
        rep.cells.push_back(cell);
      }
    }
  }

  for (Method method : config.methods) {
    for (std::size_t k : rep.ladder) {
      MethodSummary sum;
      sum.method = method;
      sum.k = k;
      std::vector<double> alg, e2e;
      for (const auto& c : rep.cells)
        if (c.method == method && c.k == k && !c.skipped) {
          alg.push_back(c.algorithm_min);
          e2e.push_back(c.end_to_end_min);
        }
      sum.skipped = alg.empty();
      sum.algorithm_mean = mean(alg);
      sum.algorithm_median = median(alg);
      sum.end_to_end_mean = mean(e2e);
      sum.end_to_end_median = median(e2e);
      rep.summaries.push_back(sum);
    }
  }

  for (const auto& s : rep.summaries)
    if (s.method == Method::optq && s.k == rep.ladder.front() && !s.skipped) {
      rep.baseline_algorithm = s.algorithm_mean;
      rep.baseline_end_to_end = s.end_to_end_mean;
    }
  for (auto& s : rep.summaries) {
    if (rep.baseline_algorithm > 0.0) s.algorithm_normalized = s.algorithm_mean / rep.baseline_algorithm;
    if (rep.baseline_end_to_end > 0.0)
      s.end_to_end_normalized = s.end_to_end_mean / rep.baseline_end_to_end;
  }

  const bool both = std::find(config.methods.begin(), config.methods.end(), Method::qronos) != config.methods.end() &&
                    std::find(config.methods.begin(), config.methods.end(), Method::qronos_base) != config.methods.end();
  if (both) {
    for (std::size_t k : rep.ladder) {
      std::vector<double> ratios;
      for (int s = 0; s < config.seeds; ++s) {
        const CellTiming* base = nullptr;
        const CellTiming* eff = nullptr;
        for (const auto& c : rep.cells) {
          if (c.k != k || c.seed != s || c.skipped) continue;
          if (c.method == Method::qronos_base) base = &c;
          if (c.method == Method::qronos) eff = &c;
        }
        if (base && eff && eff->algorithm_min > 0.0) ratios.push_back(base->algorithm_min / eff->algorithm_min);
      }
      if (ratios.empty()) continue;
      rep.speedups.push_back({k, median(ratios), *std::min_element(ratios.begin(), ratios.end()),
                              *std::max_element(ratios.begin(), ratios.end())});
    }
  }
  return rep;
}

}  // namespace qronos::bench
