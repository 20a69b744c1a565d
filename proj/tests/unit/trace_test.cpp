/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "programs.hpp"

#include <diffuse/error.hpp>
#include <diffuse/memo.hpp>
#include <diffuse/trace.hpp>
#include <diffuse/workloads.hpp>

#include <gtest/gtest.h>

#include <string>

namespace diffuse {
namespace {

using testing::id_of;
using testing::tasks_of;

std::string data(const char* name) { return std::string{DIFFUSEKIT_TEST_DATA} + "/" + name; }

/// Error text of parsing `text`, or an empty string when it parses.
std::string parse_error(std::string_view text)
{
  try {
    (void)parse_trace(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Trace);
    return e.what();
  }
  return {};
}

TEST(TraceParse, StencilFile)
{
  const auto prog = load_trace(data("stencil_small.jsonl"));
  EXPECT_EQ(prog.task_count(), 12U);
  EXPECT_EQ(prog.commands, make_stencil(WorkloadParams{4, 2, 2}).commands);
  const auto tasks = tasks_of(prog);
  EXPECT_EQ(tasks[0].kind, "ADD");
  EXPECT_EQ(tasks[4].scalars.at(0).value, 0.2);
  EXPECT_EQ(prog.partition_name(id_of(prog, "grid"), tasks[0].args[1].partition), "north");
}

TEST(TraceParse, TemporaryChainFile)
{
  const auto prog = load_trace(data("temporary_chain.jsonl"));
  EXPECT_EQ(prog.commands, testing::temporary_chain().commands);
}

TEST(TraceParse, CanonFilesMatchTheBuiltStreams)
{
  const auto left = tasks_of(load_trace(data("canon_left.jsonl")));
  EXPECT_EQ(left, testing::canon_stream(testing::CanonStream::Left));
  const auto renamed = tasks_of(load_trace(data("canon_renamed.jsonl")));
  EXPECT_TRUE(canonicalize(left).same_form(canonicalize(renamed)));
  const auto aliased = tasks_of(load_trace(data("canon_aliased.jsonl")));
  EXPECT_FALSE(canonicalize(left).same_form(canonicalize(aliased)));
}

TEST(TraceParse, EmptyFileIsAnEmptyProgram)
{
  const auto prog = load_trace(data("empty.jsonl"));
  EXPECT_TRUE(prog.commands.empty());
}

TEST(TraceParse, CommentsAndBlankLinesAreSkipped)
{
  const auto prog = parse_trace("# a comment\n\n{\"event\":\"create_store\",\"id\":\"a\",\"shape\":[4]}\n\n"
                                "{\"event\":\"flush\"}\n");
  ASSERT_EQ(prog.commands.size(), 2U);
  EXPECT_TRUE(std::holds_alternative<CreateStore>(prog.commands[0]));
  EXPECT_TRUE(std::holds_alternative<Flush>(prog.commands[1]));
}

TEST(TraceParse, IntegerIdsAreKept)
{
  const auto prog = parse_trace("{\"event\":\"create_store\",\"id\":7,\"shape\":[4]}\n"
                                "{\"event\":\"create_store\",\"id\":\"b\",\"shape\":[4]}\n");
  ASSERT_EQ(prog.commands.size(), 2U);
  EXPECT_EQ(std::get<CreateStore>(prog.commands[0]).id, StoreId{7});
  EXPECT_NE(std::get<CreateStore>(prog.commands[1]).id, StoreId{7});
}

TEST(TraceErrors, BadPrivilegeNamesTheLine)
{
  try {
    (void)load_trace(data("bad_privilege.jsonl"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Trace);
    EXPECT_NE(std::string{e.what()}.find("line 3"), std::string::npos) << e.what();
  }
}

TEST(TraceErrors, Malformed)
{
  EXPECT_NE(parse_error("{not json}\n").find("line 1"), std::string::npos);
  EXPECT_FALSE(parse_error("{\"event\":\"explode\"}\n").empty());
  EXPECT_FALSE(parse_error("{\"event\":\"drop_ref\",\"store\":\"ghost\"}\n").empty());
  EXPECT_FALSE(parse_error("{\"event\":\"create_store\",\"id\":\"a\",\"shape\":[4]}\n"
                           "{\"event\":\"create_store\",\"id\":\"a\",\"shape\":[4]}\n")
                 .empty());
  EXPECT_FALSE(parse_error("{\"event\":\"create_store\",\"id\":\"a\",\"shape\":[4]}\n"
                           "{\"event\":\"drop_ref\",\"store\":\"a\"}\n"
                           "{\"event\":\"drop_ref\",\"store\":\"a\"}\n")
                 .empty());
  EXPECT_FALSE(parse_error("{\"event\":\"create_store\",\"id\":\"a\",\"shape\":[4]}\n"
                           "{\"event\":\"create_partition\",\"id\":\"p\",\"store\":\"a\",\"kind\":\"tiling\","
                           "\"tile\":[2,2]}\n")
                 .empty());
}

TEST(TraceErrors, UseAfterDrop)
{
  const auto text = "{\"event\":\"create_store\",\"id\":\"a\",\"shape\":[4]}\n"
                    "{\"event\":\"create_partition\",\"id\":\"t\",\"store\":\"a\",\"kind\":\"tiling\",\"tile\":[2]}\n"
                    "{\"event\":\"drop_ref\",\"store\":\"a\"}\n"
                    "{\"event\":\"index_task\",\"kind\":\"FILL\",\"domain\":[2],"
                    "\"args\":[{\"store\":\"a\",\"part\":\"t\",\"priv\":\"W\"}],\"scalars\":[{\"name\":\"v\",\"value\":1}]}\n";
  EXPECT_NE(parse_error(text).find("line 4"), std::string::npos);
}

TEST(TracePrint, RoundTripsEveryWorkload)
{
  for (const auto& name : workload_names()) {
    const auto prog = make_workload(name, WorkloadParams{8, 2, 2});
    EXPECT_EQ(parse_trace(print_trace(prog)).commands, prog.commands) << name;
  }
}

}  // namespace
}  // namespace diffuse
