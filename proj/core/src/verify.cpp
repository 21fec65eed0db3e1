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
#include "qronos/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "qronos/calib.hpp"
#include "qronos/error.hpp"
#include "qronos/linalg.hpp"
#include "qronos/netsim.hpp"
#include "qronos/oracle.hpp"
#include "qronos/rounding.hpp"

namespace qronos::verify {

namespace {

constexpr std::size_t kSizes[] = {4, 8, 16, 32};
constexpr int kLevels[] = {3, 4, 16};

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
  return seed * 1000003ULL + static_cast<std::uint64_t>(trial) * 7919ULL + 17ULL;
}

void note(PropertyResult& p, double deviation) {
  ++p.checks;
  p.max_deviation = std::max(p.max_deviation, deviation);
  if (!(deviation <= p.tolerance)) {
    ++p.failures;
    p.passed = false;
  }
}

void note_exact(PropertyResult& p, bool ok) {
  ++p.checks;
  if (!ok) {
    ++p.failures;
    p.passed = false;
    p.max_deviation = std::max(p.max_deviation, 1.0);
  }
}

// Number of entries where two quantized vectors differ.
std::size_t q_mismatch(std::span<const double> a, std::span<const double> b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i];
  return n + (a.size() != b.size() ? 1 : 0);
}

double states_deviation(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, relative_deviation(a[i], b[i]));
  return d;
}

Matrix hessian(const Matrix& xt) { return matmul_tn(xt, xt); }

PropertyResult property(const std::string& name, double tol) {
  PropertyResult p;
  p.name = name;
  p.tolerance = tol;
  return p;
}

PropertyResult q_property(const std::string& name) { return property(name, 0.0); }

void run_theorem1(SuiteResult& res, int trials, double tol) {
  auto q = q_property("q exact: base vs efficient");
  auto w = property("w_states: base vs efficient", tol);
  auto qo = q_property("q exact: base vs pseudoinverse oracle");
  auto wo = property("w_states: base vs pseudoinverse oracle", tol);
  for (int i = 0; i < trials; ++i) {
    const Instance in = make_instance(res.seed, static_cast<std::size_t>(i), true);
    const Matrix h = hessian(in.xt);
    const Matrix g = matmul_tn(in.xt, in.x);
    const RoundingTrace base = quantize_qronos_base_column(in.w, h, g, in.grid, true);
    const RoundingTrace eff =
        quantize_qronos_column(in.w, h, g, inverse_hessian_factor(h), in.grid, true);
    const oracle::ReferenceTrace ref = oracle::qronos_pinv_reference(in.w, in.x, in.xt, in.grid);
    note_exact(q, q_mismatch(base.q, eff.q) == 0);
    note(w, states_deviation(base.w_states, eff.w_states));
    note_exact(qo, q_mismatch(base.q, ref.q) == 0);
    note(wo, states_deviation(base.w_states, ref.w_states));
  }
  res.properties = {q, w, qo, wo};
}

void run_lemma1(SuiteResult& res, int trials, double tol) {
  auto q = q_property("q exact: Cholesky OPTQ vs least-squares OPTQ");
  auto w = property("w_states: Cholesky OPTQ vs least-squares OPTQ", tol);
  for (int i = 0; i < trials; ++i) {
    const Instance in = make_instance(res.seed, static_cast<std::size_t>(i), false);
    const RoundingTrace chol =
        quantize_optq_column(in.w, inverse_hessian_factor(hessian(in.x)), in.grid, true);
    const oracle::ReferenceTrace ref = oracle::optq_lsq_reference(in.w, in.x, in.grid);
    note_exact(q, q_mismatch(chol.q, ref.q) == 0);
    note(w, states_deviation(chol.w_states, ref.w_states));
  }
  res.properties = {q, w};
}

void run_corollary1(SuiteResult& res, int trials, double tol) {
  auto q = q_property("q exact: Cholesky OPTQ vs argmin OPTQ");
  auto w = property("w_states: Cholesky OPTQ vs argmin OPTQ", tol);
  for (int i = 0; i < trials; ++i) {
    const Instance in = make_instance(res.seed, static_cast<std::size_t>(i), false);
    const RoundingTrace chol =
        quantize_optq_column(in.w, inverse_hessian_factor(hessian(in.x)), in.grid, true);
    const RoundingTrace arg = quantize_optq_column_ref(in.w, in.x, in.grid, 0.0, true);
    note_exact(q, q_mismatch(chol.q, arg.q) == 0);
    note(w, states_deviation(chol.w_states, arg.w_states));
  }
  res.properties = {q, w};
}

void run_prop_e2(SuiteResult& res, int trials, double tol) {
  auto q = q_property("q1 exact: (H, G) form vs pseudoinverse");
  auto w = property("w^(1) tail: (H, G) form vs pseudoinverse", tol);
  for (int i = 0; i < trials; ++i) {
    const Instance in = make_instance(res.seed, static_cast<std::size_t>(i), true);
    const Matrix h = hessian(in.xt);
    const Matrix g = matmul_tn(in.xt, in.x);
    const FirstStep s = qronos_first_step(in.w, h, g, inverse_hessian_factor(h), in.grid);
    const oracle::ReferenceTrace ref = oracle::qronos_pinv_reference(in.w, in.x, in.xt, in.grid);
    const Vector& r1 = ref.w_states[1];
    note_exact(q, s.q1 == r1[0]);
    note(w, relative_deviation(std::span<const double>(r1).subspan(1), s.w_tail));
  }
  res.properties = {q, w};
}

void run_lemma_c(SuiteResult& res, int trials, double tol) {
  auto c1 = property("C.1: regression of X_t on later columns equals -b/r", tol);
  auto c2 = property("C.2: rank-1 chain equals direct trailing inverses", tol);
  auto c3 = property("C.3: Cholesky column ratio equals inverse column ratio", tol);
  for (int i = 0; i < trials; ++i) {
    const std::size_t n = kSizes[static_cast<std::size_t>(i) % 4];
    const Matrix x = gaussian_matrix(8 * n, n, trial_seed(res.seed, static_cast<std::size_t>(i)));
    const Matrix h = hessian(x);
    const CholeskyFactor f = inverse_hessian_factor(h);
    Matrix chain = oracle::direct_inverse(h);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t size = n - t;
      const Matrix direct = oracle::direct_inverse(h.block(t, t, size, size));
      note(c2, relative_deviation(direct.data(), chain.data()));
      if (size > 1) {
        const double r = direct(0, 0);
        Vector ratio(size - 1), lratio(size - 1), neg(size - 1);
        for (std::size_t k = 1; k < size; ++k) {
          ratio[k - 1] = direct(k, 0) / r;
          lratio[k - 1] = f.L(t + k, t) / f.L(t, t);
          neg[k - 1] = -ratio[k - 1];
        }
        note(c3, relative_deviation(ratio, lratio));
        const Vector reg = oracle::direct_lstsq(x.block(0, t + 1, x.rows(), size - 1), x.column(t));
        note(c1, relative_deviation(neg, reg));
        chain = inverse_hessian_step(chain);
      }
    }
  }
  res.properties = {c1, c2, c3};
}

void run_orthogonality(SuiteResult& res, int trials, double tol) {
  auto o = property("normalized <residual, future X~ column> after each diffusion", tol);
  auto p = property("residual equals projection onto complement of future columns", tol);
  for (int i = 0; i < trials; ++i) {
    const Instance in = make_instance(res.seed, static_cast<std::size_t>(i), true);
    const std::size_t n = in.w.size();
    const RoundingTrace tr = quantize_qronos_base_column(in.w, hessian(in.xt),
                                                         matmul_tn(in.xt, in.x), in.grid, true);
    const Vector target = matvec(in.x, in.w);
    for (std::size_t t = 0; t + 1 < n; ++t) {
      const Vector& state = tr.w_states[t + 1];
      const Vector fit = matvec(in.xt, state);
      Vector r(target.size()), b(target.size());
      for (std::size_t k = 0; k < r.size(); ++k) {
        r[k] = target[k] - fit[k];
        double fixed = 0.0;
        for (std::size_t j = 0; j <= t; ++j) fixed += in.xt(k, j) * state[j];
        b[k] = target[k] - fixed;
      }
      const double rn = norm2(r);
      for (std::size_t j = t + 1; j < n; ++j) {
        const Vector col = in.xt.column(j);
        const double denom = rn * norm2(col);
        note(o, denom > 0.0 ? std::abs(dot(r, col)) / denom : 0.0);
      }
      const Matrix future = in.xt.block(0, t + 1, in.xt.rows(), n - t - 1);
      const Vector proj = project_residual(b, future);
      double diff = 0.0;
      for (std::size_t k = 0; k < r.size(); ++k) diff = std::max(diff, std::abs(proj[k] - r[k]));
      double scale = 0.0;
      for (double v : b) scale = std::max(scale, std::abs(v));
      note(p, scale > 0.0 ? diff / scale : diff);
    }
  }
  res.properties = {o, p};
}

void run_oracle(SuiteResult& res, int trials, double tol) {
  const Method methods[] = {Method::rtn, Method::optq, Method::gpfq, Method::qronos_base,
                            Method::qronos};
  auto dom = property("brute-force ILS objective <= greedy objective", 0.0);
  auto steps = property("greedy per-step choice equals alphabet enumeration", 0.0);
  for (int i = 0; i < trials; ++i) {
    const Instance in = make_instance(res.seed, static_cast<std::size_t>(i), 4, 4, 32, true);
    const oracle::IlsSolution ils = oracle::brute_force_ils(in.w, in.x, in.xt, in.grid);
    for (Method method : methods) {
      LayerQuantRequest req;
      req.W = Matrix(in.w.size(), 1);
      req.W.set_column(0, in.w);
      req.stats = accumulate_all(in.x, in.xt);
      req.grids = {in.grid};
      req.method = method;
      req.record_trace = method != Method::rtn;
      req.order_by_diag = false;
      req.x = &in.x;
      req.xt = &in.xt;
      const LayerQuantResult out = quantize_layer(req);
      const double obj = out.report.objectives[0];
      const double slack = tol * std::max(1.0, std::abs(ils.objective));
      ++dom.checks;
      if (!(ils.objective <= obj + slack)) {
        ++dom.failures;
        dom.passed = false;
        dom.max_deviation = std::max(dom.max_deviation, ils.objective - obj);
      }
      if (method == Method::rtn) continue;
      const oracle::StepRule rule = method == Method::optq   ? oracle::StepRule::optq
                                    : method == Method::gpfq ? oracle::StepRule::gpfq
                                                             : oracle::StepRule::qronos;
      const RoundingTrace& tr = out.traces[0];
      for (std::size_t t = 0; t < in.w.size(); ++t) {
        const oracle::StepState st{rule, in.w, tr.w_states[t]};
        const oracle::StepChoice best = oracle::stepwise_argmin(st, in.x, in.xt, in.grid, t);
        const double chosen = tr.q[t];
        const double chosen_obj = oracle::step_objective(st, in.x, in.xt, t, chosen);
        const bool same = chosen == best.value ||
                          chosen_obj <= best.objective + tol * std::max(1.0, std::abs(best.objective));
        ++steps.checks;
        if (!same) {
          ++steps.failures;
          steps.passed = false;
          steps.max_deviation = std::max(steps.max_deviation, chosen_obj - best.objective);
        }
      }
    }
  }
  dom.tolerance = tol;
  steps.tolerance = tol;
  res.properties = {dom, steps};
}

void run_collapse(SuiteResult& res, int trials, double) {
  auto q = q_property("X~ = X with shared damping: Qronos Q equals OPTQ Q");
  for (int i = 0; i < trials; ++i) {
    const std::size_t n = kSizes[static_cast<std::size_t>(i) % 4];
    const int levels = kLevels[(static_cast<std::size_t>(i) / 4) % 3];
    const std::uint64_t s = trial_seed(res.seed, static_cast<std::size_t>(i));
    const Matrix x = gaussian_matrix(8 * n, n, s);
    const Matrix w = gaussian_matrix(n, 4, s + 1);
    LayerQuantRequest req;
    req.W = w;
    req.stats = accumulate_all(x, x);
    for (std::size_t c = 0; c < w.cols(); ++c) req.grids.push_back(grid_from_minmax(w.column(c), levels));
    req.damping = damping_mean_diag();
    req.method = Method::qronos;
    const LayerQuantResult a = quantize_layer(req);
    req.method = Method::optq;
    const LayerQuantResult b = quantize_layer(req);
    note_exact(q, a.Q == b.Q);
  }
  res.properties = {q};
}

void run_streaming(SuiteResult& res, int trials, double tol) {
  auto hp = property("batched H equals X~^T X~", tol);
  auto gp = property("batched G equals X~^T X", tol);
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = trial_seed(res.seed, static_cast<std::size_t>(i));
    std::mt19937_64 rng(s);
    const std::size_t n = 2 + rng() % 31;
    const std::size_t m = 8 + rng() % 400;
    const Matrix x = gaussian_matrix(m, n, s + 1);
    const Matrix xt = x + 0.1 * gaussian_matrix(m, n, s + 2);
    CalibStats stats = CalibStats::zeros(n);
    for (std::size_t r0 = 0; r0 < m;) {
      const std::size_t len = std::min<std::size_t>(m - r0, 1 + rng() % 64);
      accumulate(stats, x.block(r0, 0, len, n), xt.block(r0, 0, len, n));
      r0 += len;
    }
    const Matrix h = oracle::gram(xt, xt);
    const Matrix g = oracle::gram(xt, x);
    note(hp, frobenius_norm(stats.H - h) / frobenius_norm(h));
    note(gp, frobenius_norm(stats.G - g) / frobenius_norm(g));
  }
  res.properties = {hp, gp};
}

}  // namespace

Instance make_instance(std::uint64_t seed, std::size_t trial, std::size_t n, int levels,
                       std::size_t m, bool mismatched) {
  const std::uint64_t s = trial_seed(seed, trial);
  Instance in;
  in.x = gaussian_matrix(m, n, s);
  in.xt = mismatched ? in.x + 0.1 * gaussian_matrix(m, n, s + 1) : in.x;
  const Matrix w = gaussian_matrix(n, 1, s + 2);
  in.w = w.column(0);
  in.grid = grid_from_minmax(in.w, levels);
  return in;
}

Instance make_instance(std::uint64_t seed, std::size_t trial, bool mismatched) {
  const std::size_t n = kSizes[trial % 4];
  const int levels = kLevels[(trial / 4) % 3];
  return make_instance(seed, trial, n, levels, 8 * n, mismatched);
}

double relative_deviation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(a[i]));
  }
  if (std::isnan(diff)) return std::numeric_limits<double>::infinity();
  return scale > 0.0 ? diff / scale : diff;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"theorem1",      "lemma1", "corollary1",
                                              "propE2",        "lemmaC", "orthogonality",
                                              "oracle",        "collapse", "streaming"};
  return names;
}

int default_trials(const std::string& suite) {
  if (suite == "theorem1" || suite == "lemma1") return 200;
  if (suite == "corollary1" || suite == "propE2" || suite == "lemmaC" || suite == "collapse")
    return 100;
  if (suite == "orthogonality" || suite == "streaming") return 50;
  if (suite == "oracle") return 500;
  throw UsageError("unknown suite '" + suite + "'");
}

double default_tolerance(const std::string& suite) {
  if (suite == "orthogonality") return 1e-7;
  if (suite == "streaming" || suite == "oracle") return 1e-12;
  if (suite == "collapse") return 0.0;
  default_trials(suite);
  return 1e-8;
}

SuiteResult run_suite(const std::string& suite, const SuiteOptions& opts) {
  const int trials = opts.trials.value_or(default_trials(suite));
  const double tol = opts.tol.value_or(default_tolerance(suite));
  if (trials < 0) throw UsageError("--trials must not be negative");
  if (!(tol >= 0.0)) throw UsageError("--tol must not be negative");
  SuiteResult res;
  res.suite = suite;
  res.trials = trials;
  res.seed = opts.seed;
  const auto t0 = std::chrono::steady_clock::now();
  if (suite == "theorem1") run_theorem1(res, trials, tol);
  else if (suite == "lemma1") run_lemma1(res, trials, tol);
  else if (suite == "corollary1") run_corollary1(res, trials, tol);
  else if (suite == "propE2") run_prop_e2(res, trials, tol);
  else if (suite == "lemmaC") run_lemma_c(res, trials, tol);
  else if (suite == "orthogonality") run_orthogonality(res, trials, tol);
  else if (suite == "oracle") run_oracle(res, trials, tol);
  else if (suite == "collapse") run_collapse(res, trials, tol);
  else if (suite == "streaming") run_streaming(res, trials, tol);
  else throw UsageError("unknown suite '" + suite + "'");
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (trials == 0) res.note = "0 trials";
  for (const auto& p : res.properties) res.passed = res.passed && p.passed;
  return res;
}

std::vector<SuiteResult> run_suites(const std::string& suite, const SuiteOptions& opts) {
  std::vector<SuiteResult> out;
  if (suite == "all") {
    for (const auto& name : suite_names()) out.push_back(run_suite(name, opts));
  } else {
    out.push_back(run_suite(suite, opts));
  }
  return out;
}

}  // namespace qronos::verify
