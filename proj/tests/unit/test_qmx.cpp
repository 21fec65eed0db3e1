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
#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "qronos/error.hpp"
#include "qronos/netsim.hpp"
#include "qronos/qmx.hpp"

using namespace qronos;

TEST(Qmx, HeaderFormat) {
  std::stringstream ss;
  write_qmx(ss, Matrix{{1, 2, 3}, {4, 5, 6}});
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, R"({"rows":2,"cols":3,"dtype":"f64","order":"row-major"})");
  const std::string payload((std::istreambuf_iterator<char>(ss)), std::istreambuf_iterator<char>());
  EXPECT_EQ(payload.size(), 6 * sizeof(double));
  double first;
  std::memcpy(&first, payload.data(), sizeof first);
  EXPECT_EQ(first, 1.0);
}

TEST(Qmx, RoundTripF64BitExact) {
  Matrix m = gaussian_matrix(7, 5, 1);
  m(0, 0) = -0.0;
  m(1, 1) = std::numeric_limits<double>::denorm_min();
  m(2, 2) = std::numeric_limits<double>::infinity();
  std::stringstream ss;
  write_qmx(ss, m);
  const QmxMatrix r = read_qmx(ss);
  EXPECT_EQ(r.dtype, Dtype::f64);
  ASSERT_EQ(r.matrix.rows(), 7u);
  EXPECT_EQ(std::memcmp(r.matrix.data().data(), m.data().data(), m.data().size() * sizeof(double)), 0);
}

TEST(Qmx, RoundTripF32BitExact) {
  Matrix m = gaussian_matrix(4, 6, 2);
  for (double& v : m.data()) v = static_cast<float>(v);
  std::stringstream ss;
  write_qmx(ss, m, Dtype::f32);
  const std::string bytes = ss.str();
  std::stringstream again(bytes);
  const QmxMatrix r = read_qmx(again);
  EXPECT_EQ(r.dtype, Dtype::f32);
  EXPECT_EQ(r.matrix, m);
  std::stringstream out;
  write_qmx(out, r.matrix, Dtype::f32);
  EXPECT_EQ(out.str(), bytes);
}

TEST(Qmx, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "qronos_test_roundtrip.qmx";
  const Matrix m = gaussian_matrix(3, 3, 3);
  write_qmx(path, m);
  EXPECT_EQ(read_qmx(path).matrix, m);
  std::filesystem::remove(path);
}

TEST(Qmx, Errors) {
  std::stringstream bad_header("not json\n");
  EXPECT_THROW(read_qmx(bad_header), IoError);

  std::stringstream short_payload(std::string(R"({"rows":2,"cols":2,"dtype":"f64","order":"row-major"})") +
                                  "\n" + std::string(8, '\0'));
  EXPECT_THROW(read_qmx(short_payload), ShapeError);

  std::stringstream trailing(std::string(R"({"rows":1,"cols":1,"dtype":"f32","order":"row-major"})") +
                             "\n" + std::string(5, '\0'));
  EXPECT_THROW(read_qmx(trailing), ShapeError);

  std::stringstream bad_dtype(std::string(R"({"rows":1,"cols":1,"dtype":"i8","order":"row-major"})") + "\n");
  EXPECT_THROW(read_qmx(bad_dtype), IoError);

  EXPECT_THROW(read_qmx(std::filesystem::path("/nonexistent/qronos.qmx")), IoError);
}

TEST(Qmx, DtypeNames) {
  EXPECT_EQ(dtype_from_string("f32"), Dtype::f32);
  EXPECT_EQ(dtype_size(Dtype::f32), 4u);
  EXPECT_EQ(dtype_size(Dtype::f64), 8u);
  EXPECT_EQ(to_string(Dtype::f64), "f64");
  EXPECT_THROW(dtype_from_string("f16"), UsageError);
}
