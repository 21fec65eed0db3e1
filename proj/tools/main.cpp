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
#include <cstdio>
#include <exception>
#include <functional>
#include <new>

#include "CLI11.hpp"
#include "commands.hpp"
#include "qronos/error.hpp"

using namespace qronos::cli;

namespace {

int exit_code_for(qronos::ErrorKind kind) {
  switch (kind) {
    case qronos::ErrorKind::usage: return kUsage;
    case qronos::ErrorKind::io: return kIo;
    case qronos::ErrorKind::shape: return kShape;
    case qronos::ErrorKind::numerical: return kNumerical;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qronos: post-training weight rounding with error correction"};
  app.require_subcommand(1);
  std::function<int()> run;

  QuantizeOptions q;
  auto* quant = app.add_subcommand("quantize", "Quantize one layer's weights");
  quant->add_option("--weights", q.weights, "Weights W (N x N') as QMX")->required();
  quant->add_option("--calib-x", q.calib_x, "Full-precision layer input X (m x N)");
  quant->add_option("--calib-xt", q.calib_xt, "Quantized-path layer input X~ (m x N)");
  quant->add_option("--stats-h", q.stats_h, "Precomputed H = X~^T X~");
  quant->add_option("--stats-g", q.stats_g, "Precomputed G = X~^T X");
  quant->add_option("--method", q.method, "rtn, optq, optq-ref, gpfq, qronos, qronos-base")
      ->capture_default_str();
  auto* bits = quant->add_option("--bits", q.bits, "Bit width (1.58 is ternary; default 4)");
  quant->add_option("--levels", q.levels, "Number of grid levels")->excludes(bits);
  quant->add_option("--beta", q.beta, "Min-max range shrink in (0, 1]")->capture_default_str();
  quant->add_flag("--symmetric", q.symmetric, "Symmetric grid with step-size search");
  quant->add_option("--damping", q.damping, "meandiag, topsv or none (default per method)");
  quant->add_option("--alpha", q.alpha, "topsv fraction of the top singular value");
  quant->add_option("--order", q.order, "diag or natural")->capture_default_str();
  quant->add_option("--out", q.out, "Quantized weights output (QMX)");
  quant->add_option("--report", q.report, "JSON report output");
  quant->add_flag("--trace", q.trace, "Record per-step iterates in the report");
  quant->add_option("--seed", q.seed, "Seed echoed in the report")->capture_default_str();
  quant->callback([&] { run = [&] { return cmd_quantize(q); }; });

  StatsOptions st;
  auto* stats = app.add_subcommand("stats", "Accumulate H and G from calibration data");
  stats->add_option("--calib-x", st.calib_x, "X (m x N)")->required();
  stats->add_option("--calib-xt", st.calib_xt, "X~ (m x N); defaults to X");
  stats->add_option("--batch", st.batch, "Rows per accumulation batch")->capture_default_str();
  stats->add_option("--out-h", st.out_h, "H output (QMX)")->required();
  stats->add_option("--out-g", st.out_g, "G output (QMX)")->required();
  stats->callback([&] { run = [&] { return cmd_stats(st); }; });

  RandomOptions rd;
  auto* rnd = app.add_subcommand("random", "Write a seeded Gaussian matrix");
  rnd->add_option("--rows", rd.rows)->required();
  rnd->add_option("--cols", rd.cols)->required();
  rnd->add_option("--scale", rd.scale)->capture_default_str();
  rnd->add_option("--dtype", rd.dtype, "f32 or f64")->capture_default_str();
  rnd->add_option("--seed", rd.seed)->capture_default_str();
  rnd->add_option("--out", rd.out)->required();
  rnd->callback([&] { run = [&] { return cmd_random(rd); }; });

  VerifyOptions v;
  auto* ver = app.add_subcommand("verify", "Run equivalence and property suites");
  ver->add_option("--suite", v.suite,
                  "theorem1, lemma1, corollary1, propE2, lemmaC, orthogonality, oracle, "
                  "collapse, streaming or all")
      ->capture_default_str();
  ver->add_option("--trials", v.trials, "Trials per suite (suite default when omitted)");
  ver->add_option("--tol", v.tol, "Tolerance (suite default when omitted)");
  ver->add_option("--seed", v.seed)->capture_default_str();
  ver->add_option("--out", v.out, "JSON report output");
  ver->callback([&] { run = [&] { return cmd_verify(v); }; });

  BenchOptions b;
  auto* ben = app.add_subcommand("bench", "Runtime scaling over a doubling K ladder");
  ben->add_option("--k-min", b.k_min)->capture_default_str();
  ben->add_option("--k-max", b.k_max)->capture_default_str();
  ben->add_option("--m", b.m, "Calibration samples")->capture_default_str();
  ben->add_option("--seeds", b.seeds)->capture_default_str();
  ben->add_option("--reps", b.reps, "Repetitions per cell (minimum reported)")->capture_default_str();
  ben->add_option("--levels", b.levels)->capture_default_str();
  ben->add_option("--methods", b.methods, "Comma-separated methods")->capture_default_str();
  ben->add_option("--dtype", b.dtype, "Precision of generated data: f32 or f64")->capture_default_str();
  ben->add_option("--seed", b.seed)->capture_default_str();
  ben->add_option("--out", b.out, "JSON report output");
  ben->callback([&] { run = [&] { return cmd_bench(b); }; });

  SimulateOptions s;
  auto* sim = app.add_subcommand("simulate", "Error propagation through a toy network");
  sim->add_option("--layers", s.layers)->capture_default_str();
  sim->add_option("--width", s.width)->capture_default_str();
  sim->add_option("--blocks", s.blocks)->capture_default_str();
  sim->add_option("--wlevels", s.wlevels)->capture_default_str();
  sim->add_option("--alevels", s.alevels, "Activation levels or off")->capture_default_str();
  sim->add_option("--beta", s.beta)->capture_default_str();
  sim->add_option("--method", s.methods, "Comma-separated methods (fp for no quantization)")
      ->capture_default_str();
  sim->add_option("--seeds", s.seeds)->capture_default_str();
  sim->add_option("--hadamard", s.hadamard, "on or off")->capture_default_str();
  sim->add_option("--calib-rows", s.calib_rows)->capture_default_str();
  sim->add_option("--seed", s.seed)->capture_default_str();
  sim->add_option("--out", s.out, "JSON report output");
  sim->callback([&] { run = [&] { return cmd_simulate(s); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    return run();
  } catch (const qronos::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::bad_alloc&) {
    std::fprintf(stderr, "error: out of memory\n");
    return kNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
