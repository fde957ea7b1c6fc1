// Copyright 2026 The ARC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

std::string arc_bin() { return ARC_BIN_PATH; }

fs::path tmp_dir() {
  const fs::path dir = ARC_TEST_TMP;
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = arc_bin() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

TEST(Cli, NoSubcommandFails) { EXPECT_EQ(run(""), 1); }

TEST(Cli, MissingRequiredArgumentExitsOne) {
  // adapt without --base-ckpt.
  EXPECT_EQ(run("adapt --mode arc --out " + (tmp_dir() / "x").string()), 1);
}

TEST(Cli, UnknownModeExitsOne) {
  const fs::path ckpt = tmp_dir() / "missing.arck";
  EXPECT_EQ(run("adapt --mode bogus --base-ckpt " + ckpt.string() + " --out " +
                (tmp_dir() / "y").string()),
            1);
}

TEST(Cli, BadConfigPathExitsThree) {
  EXPECT_EQ(run("pretrain --config /nonexistent/cfg --out " +
                (tmp_dir() / "z").string()),
            3);
}

TEST(Cli, MalformedConfigExitsOne) {
  const fs::path cfg = tmp_dir() / "bad.cfg";
  std::ofstream(cfg) << "unknown_key=1\n";
  EXPECT_EQ(run("pretrain --config " + cfg.string() + " --out " +
                (tmp_dir() / "w").string()),
            1);
}

TEST(Cli, MissingCheckpointExitsThree) {
  EXPECT_EQ(run("eval --ckpt /nonexistent.arck --split base --out " +
                (tmp_dir() / "v").string()),
            3);
}

TEST(Cli, CorruptCheckpointExitsThree) {
  const fs::path ckpt = tmp_dir() / "corrupt.arck";
  std::ofstream(ckpt, std::ios::binary) << "NOT A CHECKPOINT AT ALL........";
  EXPECT_EQ(run("eval --ckpt " + ckpt.string() + " --split base --out " +
                (tmp_dir() / "u").string()),
            3);
}

TEST(Cli, InvalidSplitExitsOne) {
  const fs::path ckpt = tmp_dir() / "corrupt2.arck";
  std::ofstream(ckpt, std::ios::binary) << "x";
  EXPECT_EQ(run("eval --ckpt " + ckpt.string() + " --split nope --out " +
                (tmp_dir() / "t").string()),
            1);
}

TEST(Cli, GradcheckZeroCasesExitsOne) {
  EXPECT_EQ(run("gradcheck --cases 0"), 1);
}

TEST(Cli, GradcheckSmallRunPasses) {
  EXPECT_EQ(run("gradcheck --cases 1 --seed 3"), 0);
}

TEST(Cli, ReportOnMissingRunDirFails) {
  EXPECT_NE(run("report --runs /nonexistent_run_dir"), 0);
}

}  // namespace
