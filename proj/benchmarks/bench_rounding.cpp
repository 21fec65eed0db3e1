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
#include <benchmark/benchmark.h>

#include "qronos/calib.hpp"
#include "qronos/netsim.hpp"
#include "qronos/rounding.hpp"

using namespace qronos;

namespace {

struct Layer {
  Matrix x, xt, w;
  CalibStats stats;
  std::vector<QuantGrid> grids;
};

Layer make_layer(std::size_t k) {
  Layer l;
  l.x = gaussian_matrix(4 * k, k, 1);
  l.xt = l.x + 0.1 * gaussian_matrix(4 * k, k, 2);
  l.w = gaussian_matrix(k, k / 4, 3);
  l.stats = accumulate_all(l.x, l.xt);
  for (std::size_t c = 0; c < l.w.cols(); ++c) l.grids.push_back(grid_from_minmax(l.w.column(c), 16));
  return l;
}

void run_method(benchmark::State& state, Method method) {
  const Layer l = make_layer(static_cast<std::size_t>(state.range(0)));
  LayerQuantRequest req;
  req.W = l.w;
  req.stats = l.stats;
  req.grids = l.grids;
  req.method = method;
  req.damping = default_damping(method, false);
  req.compute_objectives = false;
  for (auto _ : state) benchmark::DoNotOptimize(quantize_layer(req).Q);
}

void BM_Optq(benchmark::State& s) { run_method(s, Method::optq); }
void BM_Gpfq(benchmark::State& s) { run_method(s, Method::gpfq); }
void BM_Qronos(benchmark::State& s) { run_method(s, Method::qronos); }
void BM_QronosBase(benchmark::State& s) { run_method(s, Method::qronos_base); }

void BM_Accumulate(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Matrix x = gaussian_matrix(1000, k, 4);
  const Matrix xt = x + 0.1 * gaussian_matrix(1000, k, 5);
  for (auto _ : state) benchmark::DoNotOptimize(accumulate_all(x, xt).H);
}

}  // namespace

BENCHMARK(BM_Optq)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gpfq)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Qronos)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QronosBase)->RangeMultiplier(2)->Range(32, 128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Accumulate)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
