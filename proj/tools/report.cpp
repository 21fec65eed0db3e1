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
#include "report.hpp"

#include <cmath>
#include <fstream>

#include "qronos/error.hpp"

namespace qronos::cli {

namespace {

// JSON has no infinity or NaN.
Json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

}  // namespace

Json report_header(const std::string& command) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["command"] = command;
  return j;
}

Json to_json(const DampingPolicy& p) {
  Json j;
  j["mode"] = to_string(p.mode);
  if (p.mode == DampingMode::top_singular_fraction) j["alpha"] = p.alpha;
  j["lambda"] = p.resolved_lambda;
  return j;
}

Json to_json(const LayerReport& r) {
  Json j;
  j["method"] = r.method;
  j["objective_form"] = r.objective_form;
  j["objectives"] = r.objectives;
  j["total_objective"] = r.total_objective;
  j["damping"] = to_json(r.damping);
  j["order"] = r.order;
  j["warnings"] = r.warnings;
  return j;
}

Json to_json(const RoundingTrace& t) {
  Json j;
  j["q"] = t.q;
  j["w_states"] = t.w_states;
  j["deltas"] = t.deltas;
  if (t.objective) j["objective"] = *t.objective;
  return j;
}

Json to_json(const verify::PropertyResult& p) {
  Json j;
  j["name"] = p.name;
  j["passed"] = p.passed;
  j["checks"] = p.checks;
  j["failures"] = p.failures;
  j["max_deviation"] = number(p.max_deviation);
  j["tolerance"] = p.tolerance;
  if (!p.detail.empty()) j["detail"] = p.detail;
  return j;
}

Json to_json(const verify::SuiteResult& s) {
  Json j;
  j["suite"] = s.suite;
  j["passed"] = s.passed;
  j["trials"] = s.trials;
  j["seed"] = s.seed;
  if (!s.note.empty()) j["note"] = s.note;
  j["properties"] = Json::array();
  for (const auto& p : s.properties) j["properties"].push_back(to_json(p));
  return j;
}

Json to_json(const PropagationReport& r) {
  Json j;
  j["method"] = r.method;
  j["seed"] = r.seed;
  j["relative_errors"] = r.relative_errors;
  j["objectives"] = r.objectives;
  j["lambdas"] = r.lambdas;
  return j;
}

Json to_json(const bench::CellTiming& c) {
  Json j;
  j["method"] = to_string(c.method);
  j["k"] = c.k;
  j["seed"] = c.seed;
  if (c.skipped) {
    j["status"] = c.skip_reason;
    return j;
  }
  j["algorithm_min"] = c.algorithm_min;
  j["algorithm_mean"] = c.algorithm_mean;
  j["end_to_end_min"] = c.end_to_end_min;
  j["end_to_end_mean"] = c.end_to_end_mean;
  return j;
}

Json to_json(const bench::MethodSummary& s) {
  Json j;
  j["method"] = to_string(s.method);
  j["k"] = s.k;
  if (s.skipped) {
    j["status"] = "skipped: resource";
    return j;
  }
  j["algorithm_mean"] = s.algorithm_mean;
  j["algorithm_median"] = s.algorithm_median;
  j["algorithm_normalized"] = s.algorithm_normalized;
  j["end_to_end_mean"] = s.end_to_end_mean;
  j["end_to_end_median"] = s.end_to_end_median;
  j["end_to_end_normalized"] = s.end_to_end_normalized;
  return j;
}

Json to_json(const bench::SpeedupSummary& s) {
  return Json{{"k", s.k}, {"median", s.median}, {"min", s.min}, {"max", s.max}};
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace qronos::cli
