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
#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "qronos/calib.hpp"
#include "qronos/error.hpp"
#include "qronos/grid.hpp"
#include "qronos/qmx.hpp"
#include "report.hpp"

namespace qronos::cli {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Matrix load(const std::string& path) { return read_qmx(std::filesystem::path(path)).matrix; }

int resolve_levels(const std::optional<double>& bits, const std::optional<int>& levels) {
  if (bits && levels) throw UsageError("give either --bits or --levels, not both");
  if (levels) {
    if (*levels < 2) throw UsageError("--levels must be at least 2");
    return *levels;
  }
  const double b = bits.value_or(4.0);
  if (!(b > 0.0) || b > 30.0) throw UsageError("--bits must lie in (0, 30]");
  return levels_for_bits(b);
}

DampingPolicy resolve_damping(const std::string& name, const std::optional<double>& alpha,
                              Method method) {
  if (alpha && !(*alpha > 0.0)) throw UsageError("--alpha must be positive");
  if (name.empty()) {
    DampingPolicy p = default_damping(method, false);
    if (alpha) {
      if (p.mode != DampingMode::top_singular_fraction)
        throw UsageError("--alpha only applies to --damping topsv");
      p.alpha = *alpha;
    }
    return p;
  }
  const DampingMode mode = damping_mode_from_string(name);
  if (mode == DampingMode::top_singular_fraction) return damping_top_singular(alpha.value_or(1e-6));
  if (alpha) throw UsageError("--alpha only applies to --damping topsv");
  return mode == DampingMode::mean_diag_percent ? damping_mean_diag() : DampingPolicy{};
}

bool needs_cross_stats(Method m) {
  return m == Method::gpfq || m == Method::qronos || m == Method::qronos_base;
}

}  // namespace

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  if (out.empty()) throw UsageError("empty list '" + s + "'");
  return out;
}

int cmd_quantize(const QuantizeOptions& o) {
  const auto t0 = Clock::now();
  const Method method = method_from_string(o.method);
  const int levels = resolve_levels(o.bits, o.levels);
  if (!(o.beta > 0.0 && o.beta <= 1.0)) throw UsageError("--beta must lie in (0, 1]");
  if (o.order != "diag" && o.order != "natural") throw UsageError("--order must be diag or natural");

  const bool have_x = !o.calib_x.empty(), have_xt = !o.calib_xt.empty();
  const bool have_h = !o.stats_h.empty(), have_g = !o.stats_g.empty();
  if ((have_x || have_xt) && (have_h || have_g))
    throw UsageError("give raw activations (--calib-x/--calib-xt) or statistics (--stats-h/--stats-g), not both");
  if (have_g && !have_h) throw UsageError("--stats-g requires --stats-h");
  if (needs_cross_stats(method) && !(have_x && have_xt) && !(have_h && have_g))
    throw UsageError("method " + to_string(method) +
                     " needs both --calib-x and --calib-xt, or --stats-h and --stats-g");
  if (method == Method::optq && !(have_x || have_xt || have_h))
    throw UsageError("method optq needs --calib-xt, --calib-x or --stats-h");
  if (method == Method::optq_ref && !(have_x || have_xt))
    throw UsageError("method optq-ref needs raw activations (--calib-xt or --calib-x)");

  const QmxMatrix wq = read_qmx(std::filesystem::path(o.weights));
  const Matrix& w = wq.matrix;
  const std::size_t n = w.rows();

  std::optional<Matrix> x, xt;
  if (have_x) x = load(o.calib_x);
  if (have_xt) xt = load(o.calib_xt);
  if (x && xt && (x->rows() != xt->rows() || x->cols() != xt->cols()))
    throw ShapeError("--calib-x is " + std::to_string(x->rows()) + "x" + std::to_string(x->cols()) +
                     " but --calib-xt is " + std::to_string(xt->rows()) + "x" +
                     std::to_string(xt->cols()));
  for (const auto* m : {x ? &*x : nullptr, xt ? &*xt : nullptr})
    if (m && m->cols() != n)
      throw ShapeError("calibration data has " + std::to_string(m->cols()) +
                       " features but --weights has " + std::to_string(n) + " rows");

  LayerQuantRequest req;
  req.W = w;
  req.method = method;
  req.record_trace = o.trace;
  req.order_by_diag = o.order == "diag";
  req.damping = resolve_damping(o.damping, o.alpha, method);
  for (std::size_t c = 0; c < w.cols(); ++c) {
    const Vector col = w.column(c);
    req.grids.push_back(o.symmetric ? symmetric_scale_search(col, levels)
                                    : grid_from_minmax(col, levels, o.beta));
  }

  if (x || xt) {
    const Matrix& a = x ? *x : *xt;
    const Matrix& b = xt ? *xt : *x;
    req.stats = accumulate_all(a, b);
    req.x = &a;
    req.xt = &b;
  } else if (have_h) {
    const Matrix h = load(o.stats_h);
    require_shape(h, n, n, "--stats-h");
    req.stats = CalibStats::zeros(n);
    req.stats.H = h;
    if (have_g) {
      const Matrix g = load(o.stats_g);
      require_shape(g, n, n, "--stats-g");
      req.stats.G = g;
    } else {
      req.stats.G = h;
    }
  } else {
    req.stats = CalibStats::zeros(n);
    req.compute_objectives = false;
  }

  const auto t1 = Clock::now();
  const LayerQuantResult res = quantize_layer(req);
  const double algo = since(t1);

  if (!o.out.empty()) write_qmx(std::filesystem::path(o.out), res.Q, wq.dtype);

  Json rep = report_header("quantize");
  Json cfg;
  cfg["weights"] = o.weights;
  if (have_x) cfg["calib_x"] = o.calib_x;
  if (have_xt) cfg["calib_xt"] = o.calib_xt;
  if (have_h) cfg["stats_h"] = o.stats_h;
  if (have_g) cfg["stats_g"] = o.stats_g;
  cfg["method"] = to_string(method);
  cfg["levels"] = levels;
  cfg["beta"] = o.beta;
  cfg["symmetric"] = o.symmetric;
  cfg["damping"] = o.damping.empty() ? "default" : o.damping;
  cfg["order"] = o.order;
  cfg["trace"] = o.trace;
  cfg["seed"] = o.seed;
  rep["config"] = cfg;
  rep["shape"] = {{"rows", w.rows()}, {"cols", w.cols()}, {"dtype", to_string(wq.dtype)}};
  rep["result"] = to_json(res.report);
  if (o.trace) {
    rep["trace"] = Json::array();
    for (const auto& t : res.traces) rep["trace"].push_back(to_json(t));
  }
  rep["timing"] = {{"algorithm_seconds", algo}, {"total_seconds", since(t0)}};
  if (!o.report.empty()) write_json(o.report, rep);

  std::printf("%s: %zux%zu, lambda %.6g", to_string(method).c_str(), w.rows(), w.cols(),
              res.report.damping.resolved_lambda);
  if (req.compute_objectives)
    std::printf(", objective (%s) %.10g", res.report.objective_form.c_str(), res.report.total_objective);
  std::printf("\n");
  for (const auto& msg : res.report.warnings) std::fprintf(stderr, "warning: %s\n", msg.c_str());
  return kOk;
}

int cmd_stats(const StatsOptions& o) {
  if (o.batch == 0) throw UsageError("--batch must be positive");
  const Matrix x = load(o.calib_x);
  const Matrix xt = o.calib_xt.empty() ? x : load(o.calib_xt);
  const CalibStats s = accumulate_all(x, xt, o.batch);
  write_qmx(std::filesystem::path(o.out_h), s.H);
  write_qmx(std::filesystem::path(o.out_g), s.G);
  std::printf("H, G: %zux%zu from %zu samples\n", s.dim, s.dim, s.n_samples);
  return kOk;
}

int cmd_random(const RandomOptions& o) {
  if (o.rows == 0 || o.cols == 0) throw UsageError("--rows and --cols must be positive");
  const Matrix m = o.scale * gaussian_matrix(o.rows, o.cols, o.seed);
  write_qmx(std::filesystem::path(o.out), m, dtype_from_string(o.dtype));
  return kOk;
}

int cmd_verify(const VerifyOptions& o) {
  verify::SuiteOptions opts;
  opts.trials = o.trials;
  opts.tol = o.tol;
  opts.seed = o.seed;
  const auto results = verify::run_suites(o.suite, opts);

  bool all_passed = true;
  Json rep = report_header("verify");
  rep["config"] = {{"suite", o.suite}, {"seed", o.seed}, {"dtype", "f64"}};
  if (o.trials) rep["config"]["trials"] = *o.trials;
  if (o.tol) rep["config"]["tol"] = *o.tol;
  rep["suites"] = Json::array();
  Json timing = Json::object();
  for (const auto& s : results) {
    all_passed = all_passed && s.passed;
    rep["suites"].push_back(to_json(s));
    timing[s.suite] = s.seconds;
    std::printf("[%s] %s (%d trials%s)\n", s.passed ? "PASS" : "FAIL", s.suite.c_str(), s.trials,
                s.note.empty() ? "" : (", " + s.note).c_str());
    for (const auto& p : s.properties)
      std::printf("    %-4s %s: max deviation %.3g (tol %.3g), %zu/%zu checks failed\n",
                  p.passed ? "ok" : "FAIL", p.name.c_str(), p.max_deviation, p.tolerance,
                  p.failures, p.checks);
  }
  rep["passed"] = all_passed;
  rep["timing"] = {{"suite_seconds", timing}};
  if (!o.out.empty()) write_json(o.out, rep);
  return all_passed ? kOk : kVerifyFailed;
}

int cmd_bench(const BenchOptions& o) {
  bench::BenchConfig cfg;
  cfg.k_min = o.k_min;
  cfg.k_max = o.k_max;
  cfg.m = o.m;
  cfg.seeds = o.seeds;
  cfg.reps = o.reps;
  cfg.levels = o.levels;
  cfg.dtype = dtype_from_string(o.dtype);
  cfg.base_seed = o.seed;
  cfg.methods.clear();
  for (const auto& name : split_list(o.methods)) cfg.methods.push_back(method_from_string(name));
  if (cfg.m == 0) throw UsageError("--m must be positive");
  if (cfg.levels < 2) throw UsageError("--levels must be at least 2");

  const bench::BenchReport r = bench::run_bench(cfg);

  Json rep = report_header("bench");
  Json jc;
  jc["k_min"] = cfg.k_min;
  jc["k_max"] = cfg.k_max;
  jc["m"] = cfg.m;
  jc["seeds"] = cfg.seeds;
  jc["reps"] = cfg.reps;
  jc["levels"] = cfg.levels;
  jc["dtype"] = to_string(cfg.dtype);
  jc["seed"] = cfg.base_seed;
  jc["methods"] = Json::array();
  for (Method m : cfg.methods) jc["methods"].push_back(to_string(m));
  rep["config"] = jc;
  rep["ladder"] = r.ladder;
  Json t;
  t["machine"] = r.machine;
  t["baseline"] = {{"method", "optq"}, {"k", r.ladder.front()},
                   {"algorithm_seconds", r.baseline_algorithm},
                   {"end_to_end_seconds", r.baseline_end_to_end}};
  t["cells"] = Json::array();
  for (const auto& c : r.cells) t["cells"].push_back(to_json(c));
  t["summaries"] = Json::array();
  for (const auto& s : r.summaries) t["summaries"].push_back(to_json(s));
  t["speedups"] = Json::array();
  for (const auto& s : r.speedups) t["speedups"].push_back(to_json(s));
  rep["timing"] = t;
  if (!o.out.empty()) write_json(o.out, rep);

  std::printf("%-12s %6s %14s %12s %14s %12s\n", "method", "K", "algorithm(s)", "normalized",
              "end-to-end(s)", "normalized");
  for (const auto& s : r.summaries) {
    if (s.skipped) {
      std::printf("%-12s %6zu %s\n", to_string(s.method).c_str(), s.k, "skipped: resource");
      continue;
    }
    std::printf("%-12s %6zu %14.6g %12.4g %14.6g %12.4g\n", to_string(s.method).c_str(), s.k,
                s.algorithm_mean, s.algorithm_normalized, s.end_to_end_mean, s.end_to_end_normalized);
  }
  for (const auto& s : r.speedups)
    std::printf("speedup base/efficient at K=%zu: median %.3g (range %.3g..%.3g)\n", s.k, s.median,
                s.min, s.max);
  return kOk;
}

int cmd_simulate(const SimulateOptions& o) {
  std::optional<int> act;
  if (o.alevels != "off") {
    try {
      std::size_t pos = 0;
      act = std::stoi(o.alevels, &pos);
      if (pos != o.alevels.size()) throw std::invalid_argument(o.alevels);
    } catch (const std::exception&) {
      throw UsageError("--alevels must be an integer or 'off'");
    }
    if (*act < 2) throw UsageError("--alevels must be at least 2");
  }
  if (o.hadamard != "on" && o.hadamard != "off") throw UsageError("--hadamard must be on or off");
  if (o.seeds < 1) throw UsageError("--seeds must be positive");
  if (o.calib_rows == 0) throw UsageError("--calib-rows must be positive");
  if (o.wlevels < 2) throw UsageError("--wlevels must be at least 2");
  const bool hadamard = o.hadamard == "on";
  if (hadamard && !is_power_of_two(o.width))
    throw UsageError("--width must be a power of two when --hadamard is on");

  std::vector<std::optional<Method>> methods;
  std::vector<std::string> names;
  for (const auto& name : split_list(o.methods)) {
    methods.push_back(name == "fp" ? std::nullopt : std::optional<Method>(method_from_string(name)));
    names.push_back(methods.back() ? to_string(*methods.back()) : "fp");
  }

  const auto t0 = Clock::now();
  Json rep = report_header("simulate");
  Json cfg;
  cfg["layers"] = o.layers;
  cfg["width"] = o.width;
  cfg["blocks"] = o.blocks;
  cfg["wlevels"] = o.wlevels;
  cfg["alevels"] = o.alevels;
  cfg["beta"] = o.beta;
  cfg["hadamard"] = hadamard;
  cfg["calib_rows"] = o.calib_rows;
  cfg["seeds"] = o.seeds;
  cfg["seed"] = o.seed;
  cfg["methods"] = names;
  rep["config"] = cfg;
  rep["runs"] = Json::array();

  std::map<std::string, double> final_sum;
  for (int s = 0; s < o.seeds; ++s) {
    RandomNetworkOptions net;
    net.layers = o.layers;
    net.width = o.width;
    net.blocks = o.blocks;
    net.weight_levels = o.wlevels;
    net.beta = o.beta;
    net.act_levels = act;
    net.hadamard = hadamard;
    net.seed = o.seed * 1000ULL + static_cast<std::uint64_t>(s);
    const NetworkSpec spec = make_random_network(net);
    const Matrix calib = gaussian_matrix(o.calib_rows, o.width, net.seed * 7777ULL + 5ULL);
    for (std::size_t i = 0; i < methods.size(); ++i) {
      NetworkQuantOptions q;
      q.method = methods[i];
      const NetworkQuantResult r = quantize_network(spec, calib, q);
      rep["runs"].push_back(to_json(r.report));
      final_sum[names[i]] += r.report.relative_errors.back();
    }
  }
  Json summary = Json::object();
  for (const auto& name : names) {
    const double mean = final_sum[name] / o.seeds;
    summary[name] = {{"mean_final_relative_error", mean}};
    std::printf("%-12s mean final-layer relative error %.6g\n", name.c_str(), mean);
  }
  rep["summary"] = summary;
  rep["timing"] = {{"total_seconds", since(t0)}};
  if (!o.out.empty()) write_json(o.out, rep);
  return kOk;
}

}  // namespace qronos::cli
