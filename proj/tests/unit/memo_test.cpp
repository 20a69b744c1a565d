/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "programs.hpp"

#include <diffuse/engine.hpp>
#include <diffuse/memo.hpp>
#include <diffuse/workloads.hpp>

#include <gtest/gtest.h>

namespace diffuse {
namespace {

using testing::CanonStream;
using testing::canon_stream;
using testing::tasks_of;

MemoKey key_for(const std::vector<IndexTask>& window, const StoreCatalog& catalog, std::set<StoreId> live = {})
{
  return make_memo_key(canonicalize(window), window, live, catalog, EngineOptions{}.analysis_word());
}

TEST(Canonicalize, LeftAndMiddleAgree)
{
  const auto left   = canonicalize(canon_stream(CanonStream::Left));
  const auto middle = canonicalize(canon_stream(CanonStream::Middle));
  EXPECT_TRUE(left.same_form(middle));
  EXPECT_EQ(left.to_string(), middle.to_string());
  EXPECT_EQ(left.to_string(),
            "T1([(0,R), (1,W)])\n"
            "T2([(1,R), (0,W)])\n"
            "T3([(0,R), (2,W)])\n"
            "T4([(2,R), (0,W)])\n");
  EXPECT_EQ(left.stores, (std::vector<StoreId>{StoreId{1}, StoreId{2}, StoreId{3}}));
  EXPECT_EQ(middle.stores, (std::vector<StoreId>{StoreId{5}, StoreId{6}, StoreId{7}}));
}

TEST(Canonicalize, RightDiffersAtT3)
{
  const auto left  = canonicalize(canon_stream(CanonStream::Left));
  const auto right = canonicalize(canon_stream(CanonStream::Right));
  EXPECT_FALSE(left.same_form(right));
  ASSERT_EQ(right.tasks.size(), 4U);
  EXPECT_EQ(right.tasks[2].args[0].store, 2U);
  EXPECT_EQ(right.tasks[2].args[1].store, 2U);
  EXPECT_EQ(left.tasks[0], right.tasks[0]);
  EXPECT_EQ(left.tasks[1], right.tasks[1]);
  EXPECT_NE(left.tasks[2], right.tasks[2]);
}

TEST(Canonicalize, EmptyWindow)
{
  const auto c = canonicalize(std::vector<IndexTask>{});
  EXPECT_TRUE(c.tasks.empty());
  EXPECT_EQ(c.to_string(), "");
}

TEST(Canonicalize, PartitionsAndDomainsAreIndexed)
{
  const auto a = Partition::tiling(Point{4});
  const auto b = Partition::tiling(Point{2});
  using testing::R;
  using testing::W;
  const std::vector<IndexTask> w1{testing::make_task("COPY", Domain{2}, {R(StoreId{0}, a), W(StoreId{1}, a)})};
  const std::vector<IndexTask> w2{testing::make_task("COPY", Domain{2}, {R(StoreId{0}, a), W(StoreId{1}, b)})};
  const std::vector<IndexTask> w3{testing::make_task("COPY", Domain{4}, {R(StoreId{0}, b), W(StoreId{1}, b)})};
  EXPECT_FALSE(canonicalize(w1).same_form(canonicalize(w2)));
  // Same structure at a different scale.
  EXPECT_TRUE(canonicalize(w1).same_form(canonicalize(w3)));
}

TEST(MemoKeyTest, ScalarValuesDoNotMatter)
{
  const auto catalog = testing::canon_catalog();
  using testing::R;
  using testing::W;
  const auto p = Partition::tiling(Point{4});
  const std::vector<IndexTask> a{testing::make_task("MULT", Domain{2}, {R(StoreId{1}, p), W(StoreId{2}, p)}, {{"s", 0.2}})};
  const std::vector<IndexTask> b{testing::make_task("MULT", Domain{2}, {R(StoreId{3}, p), W(StoreId{4}, p)}, {{"s", 0.5}})};
  EXPECT_EQ(key_for(a, catalog), key_for(b, catalog));
}

TEST(MemoKeyTest, LivenessMatters)
{
  const auto catalog = testing::canon_catalog();
  const auto window  = canon_stream(CanonStream::Left);
  EXPECT_NE(key_for(window, catalog, {StoreId{1}}), key_for(window, catalog, {StoreId{1}, StoreId{3}}));
  EXPECT_EQ(key_for(window, catalog, {StoreId{1}}), key_for(canon_stream(CanonStream::Middle), catalog, {StoreId{5}}));
}

TEST(MemoCacheTest, LookupInsertAndCounters)
{
  const auto catalog = testing::canon_catalog();
  MemoCache cache;
  const auto left = key_for(canon_stream(CanonStream::Left), catalog);
  EXPECT_EQ(cache.lookup(left), nullptr);
  EXPECT_EQ(cache.misses(), 1U);

  auto entry = std::make_shared<MemoEntry>();
  entry->prefix_len = 4;
  cache.insert(left, entry);
  auto other = std::make_shared<MemoEntry>();
  other->prefix_len = 1;
  cache.insert(left, other);  // idempotent: the first entry stays
  EXPECT_EQ(cache.size(), 1U);

  const auto hit = cache.lookup(key_for(canon_stream(CanonStream::Middle), catalog));
  ASSERT_NE(hit, nullptr);
  EXPECT_EQ(hit->prefix_len, 4U);
  EXPECT_EQ(cache.hits(), 1U);
  EXPECT_EQ(cache.lookup(key_for(canon_stream(CanonStream::Right), catalog)), nullptr);
}

TEST(MemoReplay, ReplayMatchesFreshAnalysis)
{
  // Two consecutive stencil iterations are renamings of each other.
  const auto prog  = make_stencil(WorkloadParams{8, 2, 2});
  const auto tasks = tasks_of(prog);
  const std::vector<IndexTask> first(tasks.begin(), tasks.begin() + 6);
  const std::vector<IndexTask> second(tasks.begin() + 6, tasks.end());
  const auto c1 = canonicalize(first);
  const auto c2 = canonicalize(second);
  ASSERT_TRUE(c1.same_form(c2));

  const auto registry = GeneratorRegistry::builtin();
  const auto prefix   = longest_fusible_prefix(first, &registry);
  const auto plan     = build_fused_task(first, prefix.length, registry);
  const auto entry    = make_memo_entry(c1, prefix, plan, nullptr);
  const auto replayed = replay_plan(entry, c2, second);
  const auto fresh    = build_fused_task(second, longest_fusible_prefix(second, &registry).length, registry);
  EXPECT_EQ(replayed.prefix_len, fresh.prefix_len);
  EXPECT_EQ(replayed.fused_task, fresh.fused_task);
  EXPECT_EQ(replayed.all_args, fresh.all_args);
  EXPECT_EQ(replayed.arg_map, fresh.arg_map);
  EXPECT_EQ(replay_verdict(entry, c2), longest_fusible_prefix(second, &registry).verdict);
}

}  // namespace
}  // namespace diffuse
