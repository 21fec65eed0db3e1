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
#include "qronos/qmx.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "json.hpp"
#include "qronos/error.hpp"

static_assert(std::endian::native == std::endian::little, "QMX I/O assumes a little-endian host");

namespace qronos {

std::string to_string(Dtype d) { return d == Dtype::f32 ? "f32" : "f64"; }

Dtype dtype_from_string(const std::string& s) {
  if (s == "f32") return Dtype::f32;
  if (s == "f64") return Dtype::f64;
  throw UsageError("unknown dtype '" + s + "' (expected f32 or f64)");
}

std::size_t dtype_size(Dtype d) { return d == Dtype::f32 ? 4 : 8; }

void write_qmx(std::ostream& out, const Matrix& m, Dtype dtype) {
  out << "{\"rows\":" << m.rows() << ",\"cols\":" << m.cols() << ",\"dtype\":\"" << to_string(dtype)
      << "\",\"order\":\"row-major\"}\n";
  if (dtype == Dtype::f64) {
    out.write(reinterpret_cast<const char*>(m.data().data()),
              static_cast<std::streamsize>(m.data().size() * sizeof(double)));
  } else {
    std::vector<float> buf(m.data().begin(), m.data().end());
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!out) throw IoError("failed writing QMX payload");
}

void write_qmx(const std::filesystem::path& path, const Matrix& m, Dtype dtype) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_qmx(out, m, dtype);
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

QmxMatrix read_qmx(std::istream& in, const std::string& name) {
  std::string header;
  if (!std::getline(in, header)) throw IoError(name + ": missing QMX header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(name + ": malformed QMX header (" + e.what() + ")");
  }
  QmxMatrix out;
  std::size_t rows = 0, cols = 0;
  try {
    rows = h.at("rows").get<std::size_t>();
    cols = h.at("cols").get<std::size_t>();
    out.dtype = dtype_from_string(h.at("dtype").get<std::string>());
    if (h.at("order").get<std::string>() != "row-major")
      throw IoError(name + ": only row-major QMX files are supported");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(name + ": incomplete QMX header (" + e.what() + ")");
  } catch (const UsageError& e) {
    throw IoError(name + ": " + e.what());
  }
  const std::size_t count = rows * cols;
  const std::size_t bytes = count * dtype_size(out.dtype);
  std::vector<char> payload(bytes);
  in.read(payload.data(), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes)
    throw ShapeError(name + ": payload holds " + std::to_string(in.gcount()) + " bytes, header " +
                     std::to_string(rows) + "x" + std::to_string(cols) + " " + to_string(out.dtype) +
                     " needs " + std::to_string(bytes));
  if (in.peek() != std::char_traits<char>::eof())
    throw ShapeError(name + ": trailing bytes after " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " payload");
  out.matrix = Matrix(rows, cols);
  auto dst = out.matrix.data();
  if (out.dtype == Dtype::f64) {
    std::memcpy(dst.data(), payload.data(), bytes);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      float f;
      std::memcpy(&f, payload.data() + i * 4, 4);
      dst[i] = static_cast<double>(f);
    }
  }
  return out;
}

QmxMatrix read_qmx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_qmx(in, path.string());
}

}  // namespace qronos
