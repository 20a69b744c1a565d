/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "cli.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Result {
  int status;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args)
{
  args.insert(args.begin(), "diffusekit");
  std::vector<const char*> argv;
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out;
  std::ostringstream err;
  const int status = diffuse::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

std::string data(const char* name) { return std::string{DIFFUSEKIT_TEST_DATA} + "/" + name; }

std::string slurp(const std::filesystem::path& p)
{
  std::ifstream f{p};
  return {std::istreambuf_iterator<char>{f}, {}};
}

TEST(Cli, AnalyzeNamesTheBlockingView)
{
  const auto r = run({"analyze", data("stencil_small.jsonl")});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("5 tasks -> FUSED_ADD_MULT"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("AntiDep blocks task 5 (COPY) on store grid"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("temporaries: t1.0 t2.0 t3.0 avg.0"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("[memo hit]"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("tasks 12 -> 4"), std::string::npos) << r.out;
}

TEST(Cli, RunDiffReportsIdenticalHeaps)
{
  const auto r = run({"run", "--diff", "--gen", "stencil", "--size", "8", "--nodes", "2", "--iters", "3"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("heaps identical"), std::string::npos) << r.out;
}

TEST(Cli, RunIsolatedWithoutMemo)
{
  const auto r = run({"run", "--diff", "--isolated", "--no-memo", "--no-temp-elim", data("temporary_chain.jsonl")});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("heaps identical"), std::string::npos) << r.out;
}

TEST(Cli, CanonOfRenamedStreamsIsIdentical)
{
  const auto left    = run({"canon", data("canon_left.jsonl")});
  const auto renamed = run({"canon", data("canon_renamed.jsonl")});
  const auto aliased = run({"canon", data("canon_aliased.jsonl")});
  ASSERT_EQ(left.status, 0) << left.err;
  EXPECT_EQ(left.out, renamed.out);
  EXPECT_NE(left.out, aliased.out);
  EXPECT_NE(left.out.find("T1([(0,R), (1,W)])"), std::string::npos) << left.out;
}

TEST(Cli, BenchWritesJson)
{
  const auto path = std::filesystem::temp_directory_path() / "diffusekit_cli_bench.json";
  const auto r    = run({"bench", "stencil", "jacobi", "--size", "8", "--iters", "2", "--json-report", path.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("stencil"), std::string::npos);
  const auto json = slurp(path);
  EXPECT_NE(json.find("\"fused_tasks_per_iter\": 2.0"), std::string::npos) << json;
  EXPECT_NE(json.find("\"name\": \"jacobi\""), std::string::npos) << json;
  std::filesystem::remove(path);
}

TEST(Cli, BadPrivilegeFails)
{
  const auto r = run({"analyze", data("bad_privilege.jsonl")});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST(Cli, GenPrintsAParsableTrace)
{
  const auto r = run({"gen", "jacobi", "--size", "4", "--iters", "1"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("\"kind\":\"MATVEC\""), std::string::npos);
}

TEST(Cli, MissingInputIsAnError)
{
  EXPECT_EQ(run({"analyze"}).status, 1);
  EXPECT_NE(run({}).status, 0);
}

}  // namespace
