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
#include <iosfwd>
#include <string>

#include "qronos/matrix.hpp"

namespace qronos {

/// QMX: one JSON header line {"rows":R,"cols":C,"dtype":"f64"|"f32","order":"row-major"}
/// followed by R*C little-endian IEEE-754 values.
enum class Dtype { f32, f64 };

std::string to_string(Dtype d);
Dtype dtype_from_string(const std::string& s);
std::size_t dtype_size(Dtype d);

struct QmxMatrix {
  Matrix matrix;
  Dtype dtype = Dtype::f64;
};

void write_qmx(std::ostream& out, const Matrix& m, Dtype dtype = Dtype::f64);
void write_qmx(const std::filesystem::path& path, const Matrix& m, Dtype dtype = Dtype::f64);
/// Throws IoError on unreadable files or malformed headers, ShapeError when
/// the payload length does not match the header.
QmxMatrix read_qmx(std::istream& in, const std::string& name = "<stream>");
QmxMatrix read_qmx(const std::filesystem::path& path);

}  // namespace qronos
