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

#include <filesystem>
#include <string>

#include "json.hpp"
#include "qronos/bench.hpp"
#include "qronos/linalg.hpp"
#include "qronos/netsim.hpp"
#include "qronos/rounding.hpp"
#include "qronos/verify.hpp"

namespace qronos::cli {

using Json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

/// {"schema": 1, "command": name}; callers add the rest. Everything that
/// depends on the clock goes under "timing".
Json report_header(const std::string& command);

Json to_json(const DampingPolicy& p);
Json to_json(const LayerReport& r);
Json to_json(const RoundingTrace& t);
Json to_json(const verify::PropertyResult& p);
Json to_json(const verify::SuiteResult& s);
Json to_json(const PropagationReport& r);
Json to_json(const bench::CellTiming& c);
Json to_json(const bench::MethodSummary& s);
Json to_json(const bench::SpeedupSummary& s);

/// Pretty-printed, newline-terminated. Throws IoError.
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace qronos::cli
