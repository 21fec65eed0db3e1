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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"
#include "qronos/netsim.hpp"
#include "qronos/qmx.hpp"

using namespace qronos;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("qronos_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(QRONOS_CLI_PATH) + " " + args + " > " + path("stdout.txt") +
                            " 2> " + path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  nlohmann::json json(const std::string& name) const { return nlohmann::json::parse(slurp(name)); }

  void write_calib(bool mismatched) const {
    const Matrix x = gaussian_matrix(96, 12, 1);
    write_qmx(fs::path(path("x.qmx")), x);
    write_qmx(fs::path(path("xt.qmx")), mismatched ? x + 0.1 * gaussian_matrix(96, 12, 2) : x);
    write_qmx(fs::path(path("w.qmx")), gaussian_matrix(12, 6, 3));
  }

  fs::path dir;
};

}  // namespace

TEST_F(Cli, RtnOnGridIsBitExact) {
  Matrix w(8, 3);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t r = 0; r < 8; ++r) w(r, c) = 0.5 * static_cast<double>((r + c) % 4) - 1.0;
  write_qmx(fs::path(path("w.qmx")), w);
  ASSERT_EQ(run("quantize --weights " + path("w.qmx") + " --method rtn --levels 4 --out " + path("q.qmx")), 0);
  EXPECT_EQ(slurp("q.qmx"), slurp("w.qmx"));
}

TEST_F(Cli, QronosOnMatchedInputsEqualsOptq) {
  write_calib(false);
  const std::string common = "quantize --weights " + path("w.qmx") + " --calib-x " + path("x.qmx") +
                             " --calib-xt " + path("xt.qmx") + " --bits 2 --damping meandiag";
  ASSERT_EQ(run(common + " --method qronos --out " + path("a.qmx")), 0);
  ASSERT_EQ(run(common + " --method optq --out " + path("b.qmx")), 0);
  EXPECT_EQ(slurp("a.qmx"), slurp("b.qmx"));
}

TEST_F(Cli, StatsPathMatchesRawPath) {
  write_calib(true);
  ASSERT_EQ(run("stats --calib-x " + path("x.qmx") + " --calib-xt " + path("xt.qmx") + " --batch 17 --out-h " +
                path("h.qmx") + " --out-g " + path("g.qmx")),
            0);
  for (const std::string m : {"qronos", "gpfq", "qronos-base", "optq"}) {
    ASSERT_EQ(run("quantize --weights " + path("w.qmx") + " --calib-x " + path("x.qmx") + " --calib-xt " +
                  path("xt.qmx") + " --method " + m + " --out " + path("raw.qmx")),
              0);
    ASSERT_EQ(run("quantize --weights " + path("w.qmx") + " --stats-h " + path("h.qmx") + " --stats-g " +
                  path("g.qmx") + " --method " + m + " --out " + path("st.qmx")),
              0);
    EXPECT_EQ(slurp("raw.qmx"), slurp("st.qmx")) << m;
  }
}

TEST_F(Cli, UsageErrors) {
  write_calib(true);
  EXPECT_EQ(run("quantize --weights " + path("w.qmx") + " --calib-x " + path("x.qmx") + " --method qronos"), 2);
  EXPECT_EQ(run("quantize --weights " + path("w.qmx") + " --method gpfq"), 2);
  EXPECT_EQ(run("quantize --weights " + path("w.qmx") + " --method bogus"), 2);
  EXPECT_EQ(run("quantize --weights " + path("w.qmx") + " --bits 2 --levels 4 --method rtn"), 2);
  EXPECT_EQ(run("quantize --weights " + path("w.qmx") + " --stats-h " + path("x.qmx") + " --method optq-ref"), 2);
  EXPECT_EQ(run("nonsense"), 2);
  EXPECT_EQ(run(""), 2);
}

TEST_F(Cli, IoShapeAndNumericalErrors) {
  write_calib(true);
  EXPECT_EQ(run("quantize --weights " + path("missing.qmx") + " --method rtn"), 3);
  EXPECT_NE(slurp("stderr.txt").find("missing.qmx"), std::string::npos);

  write_qmx(fs::path(path("w5.qmx")), gaussian_matrix(5, 2, 4));
  EXPECT_EQ(run("quantize --weights " + path("w5.qmx") + " --calib-x " + path("x.qmx") + " --calib-xt " +
                path("xt.qmx") + " --method qronos"),
            4);

  write_qmx(fs::path(path("zero.qmx")), Matrix(20, 12));
  EXPECT_EQ(run("quantize --weights " + path("w.qmx") + " --calib-xt " + path("zero.qmx") +
                " --method optq --damping none"),
            5);
}

TEST_F(Cli, ReportIsDeterministicOutsideTiming) {
  write_calib(true);
  const std::string cmd = "quantize --weights " + path("w.qmx") + " --calib-x " + path("x.qmx") + " --calib-xt " +
                          path("xt.qmx") + " --method qronos --seed 7 --trace --report ";
  ASSERT_EQ(run(cmd + path("r1.json")), 0);
  ASSERT_EQ(run(cmd + path("r2.json")), 0);
  nlohmann::json a = json("r1.json"), b = json("r2.json");
  EXPECT_EQ(a["schema"], 1);
  EXPECT_TRUE(a.contains("timing"));
  a.erase("timing");
  b.erase("timing");
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(a["result"]["objective_form"], "residual");
  EXPECT_EQ(a["trace"].size(), 6u);
}

TEST_F(Cli, VerifyExitCodes) {
  EXPECT_EQ(run("verify --suite theorem1 --trials 0 --out " + path("v.json")), 0);
  EXPECT_EQ(json("v.json")["suites"][0]["note"], "0 trials");
  EXPECT_EQ(run("verify --suite theorem1 --trials 10 --tol 0"), 6);
  EXPECT_EQ(run("verify --suite oracle --trials 20"), 0);
  EXPECT_EQ(run("verify --suite unknown"), 2);
}

TEST_F(Cli, SimulateReportShape) {
  ASSERT_EQ(run("simulate --layers 3 --width 16 --method fp,rtn,optq,gpfq,qronos --seeds 3 --out " +
                path("s.json")),
            0);
  const nlohmann::json s = json("s.json");
  EXPECT_EQ(s["runs"].size(), 15u);
  for (const auto& r : s["runs"]) {
    EXPECT_EQ(r["relative_errors"].size(), 3u);
    if (r["method"] == "fp")
      for (const auto& e : r["relative_errors"]) EXPECT_EQ(e.get<double>(), 0.0);
  }
  EXPECT_EQ(run("simulate --width 12 --hadamard on"), 2);
  EXPECT_EQ(run("simulate --alevels many"), 2);
}

TEST_F(Cli, BenchReport) {
  ASSERT_EQ(run("bench --k-min 8 --k-max 16 --m 64 --seeds 1 --reps 1 --out " + path("b.json")), 0);
  const nlohmann::json b = json("b.json");
  EXPECT_EQ(b["schema"], 1);
  EXPECT_EQ(b["ladder"].size(), 2u);
  EXPECT_EQ(b["timing"]["cells"].size(), 8u);
  for (const auto& s : b["timing"]["summaries"])
    if (s["method"] == "optq" && s["k"] == 8) EXPECT_EQ(s["algorithm_normalized"].get<double>(), 1.0);
}

TEST_F(Cli, RandomWritesRequestedDtype) {
  ASSERT_EQ(run("random --rows 3 --cols 4 --dtype f32 --seed 2 --out " + path("r.qmx")), 0);
  const QmxMatrix m = read_qmx(fs::path(path("r.qmx")));
  EXPECT_EQ(m.dtype, Dtype::f32);
  EXPECT_EQ(m.matrix.rows(), 3u);
}
