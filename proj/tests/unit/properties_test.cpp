/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "fuzz.hpp"
#include "programs.hpp"

#include <diffuse/memo.hpp>
#include <diffuse/oracle.hpp>
#include <diffuse/trace.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

namespace diffuse {
namespace {

using testing::fuzz_differential;
using testing::fuzz_soundness;
using testing::random_program;
using testing::tasks_of;

std::string report(const testing::FuzzSummary& s)
{
  std::string out;
  for (const auto& m : s.messages) {
    out += m + "\n";
  }
  return out;
}

TEST(Properties, FuzzedPrefixesAreOracleFusible)
{
  const auto s = fuzz_soundness(1000, 200);
  EXPECT_EQ(s.failures, 0U) << report(s);
  EXPECT_GT(s.fused_prefixes, 0U);
  EXPECT_EQ(s.oracle_checks, s.fused_prefixes);
}

TEST(Properties, FusedExecutionMatchesSequential)
{
  const auto s = fuzz_differential(5000, 60);
  EXPECT_EQ(s.failures, 0U) << report(s);
  EXPECT_GT(s.fused_prefixes, 0U);
  EXPECT_GT(s.temporaries, 0U);
}

TEST(Properties, FuzzerIsDeterministic)
{
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(random_program(seed).commands, random_program(seed).commands);
  }
}

TEST(Properties, FuzzedStreamsAreValid)
{
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto prog = random_program(seed);
    StoreCatalog catalog;
    for (const auto& c : prog.commands) {
      if (const auto* cs = std::get_if<CreateStore>(&c)) {
        catalog.add(Store{cs->id, cs->shape});
        for (auto e : cs->shape.extents()) {
          EXPECT_LE(e, 16);
        }
      } else if (const auto* l = std::get_if<Launch>(&c)) {
        EXPECT_NO_THROW(validate(l->task, catalog)) << "seed " << seed;
        for (auto e : l->task.launch.extents()) {
          EXPECT_LE(e, 4);
        }
      }
    }
  }
}

TEST(Properties, TraceRoundTripsOnFuzzedPrograms)
{
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto prog = random_program(seed);
    const auto text = print_trace(prog);
    const auto back = parse_trace(text);
    EXPECT_EQ(back.commands, prog.commands) << "seed " << seed;
    // Once every partition is declared, printing is a fixed point.
    const auto normal = print_trace(back);
    EXPECT_EQ(print_trace(parse_trace(normal)), normal);
  }
}

TEST(Properties, CanonicalFormIgnoresStoreRenaming)
{
  std::mt19937_64 rng{7};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto tasks = tasks_of(random_program(seed));
    std::vector<std::uint32_t> perm(64);
    for (std::uint32_t i = 0; i < perm.size(); ++i) {
      perm[i] = i + 100;
    }
    std::shuffle(perm.begin(), perm.end(), rng);
    auto renamed = tasks;
    for (auto& t : renamed) {
      for (auto& a : t.args) {
        a.store = StoreId{perm[a.store.value]};
      }
    }
    const auto c1 = canonicalize(tasks);
    const auto c2 = canonicalize(renamed);
    EXPECT_TRUE(c1.same_form(c2));
    EXPECT_EQ(c1.to_string(), c2.to_string());
  }
}

TEST(Properties, IdentityTilesArePairwiseDisjointAndCover)
{
  std::mt19937_64 rng{11};
  auto pick = [&](Coord lo, Coord hi) { return std::uniform_int_distribution<Coord>{lo, hi}(rng); };
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t rank = static_cast<std::size_t>(pick(1, 3));
    std::vector<Coord> shape(rank), tile(rank), launch(rank);
    for (std::size_t d = 0; d < rank; ++d) {
      shape[d]  = pick(1, 8);
      tile[d]   = pick(1, 4);
      launch[d] = pick(1, 4);
    }
    const Store store{StoreId{0}, Domain{shape}};
    const auto part = Partition::tiling(Point{tile});
    const Domain dom{launch};
    std::vector<int> hits(store.shape.volume());
    dom.for_each_point([&](const Point& p) {
      const auto r = sub_store_bounds(store, part, p).bounds;
      if (r.empty()) {
        return;
      }
      Domain{r.extents()}.for_each_point([&](const Point& e) {
        std::vector<Coord> c(rank);
        for (std::size_t d = 0; d < rank; ++d) {
          c[d] = r.lo[d] + e[d];
        }
        ++hits[store.shape.linearize(Point{c})];
      });
    });
    store.shape.for_each_point([&](const Point& e) {
      bool inside = true;
      for (std::size_t d = 0; d < rank; ++d) {
        inside = inside && e[d] < tile[d] * launch[d];
      }
      EXPECT_EQ(hits[store.shape.linearize(e)], inside ? 1 : 0);
    });
  }
}

TEST(Properties, CoversAgreesWithEnumeration)
{
  std::mt19937_64 rng{13};
  auto pick = [&](Coord lo, Coord hi) { return std::uniform_int_distribution<Coord>{lo, hi}(rng); };
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t rank = static_cast<std::size_t>(pick(1, 2));
    std::vector<Coord> shape(rank), tile(rank), offset(rank), launch(rank);
    for (std::size_t d = 0; d < rank; ++d) {
      shape[d]  = pick(1, 32);
      tile[d]   = pick(1, 8);
      offset[d] = pick(-3, 3);
      launch[d] = pick(1, 8);
    }
    const Store store{StoreId{0}, Domain{shape}};
    const auto part = Partition::tiling(Point{tile}, Point{offset});
    const Domain dom{launch};
    std::vector<bool> seen(store.shape.volume());
    dom.for_each_point([&](const Point& p) {
      const auto r = sub_store_bounds(store, part, p).bounds;
      store.shape.for_each_point([&](const Point& e) {
        if (r.contains(e.coords())) {
          seen[store.shape.linearize(e)] = true;
        }
      });
    });
    const bool brute = std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
    EXPECT_EQ(covers(store, part, dom), brute) << "trial " << trial;
  }
}

TEST(Properties, EqualPartitionsGiveEqualSubStores)
{
  std::mt19937_64 rng{17};
  auto pick = [&](Coord lo, Coord hi) { return std::uniform_int_distribution<Coord>{lo, hi}(rng); };
  std::vector<Partition> parts{Partition::none()};
  for (int i = 0; i < 12; ++i) {
    parts.push_back(Partition::tiling(Point{pick(1, 2), pick(1, 2)}, Point{pick(0, 1), pick(0, 1)}));
  }
  const Store store{StoreId{0}, Domain{6, 6}};
  const Domain launch{3, 3};
  for (const auto& a : parts) {
    EXPECT_TRUE(partition_eq(a, a));
    for (const auto& b : parts) {
      EXPECT_EQ(partition_eq(a, b), partition_eq(b, a));
      if (!partition_eq(a, b)) {
        continue;
      }
      EXPECT_EQ(hash_value(a), hash_value(b));
      for (const auto& c : parts) {
        if (partition_eq(b, c)) {
          EXPECT_TRUE(partition_eq(a, c));
        }
      }
      launch.for_each_point(
        [&](const Point& p) { EXPECT_EQ(sub_store_bounds(store, a, p), sub_store_bounds(store, b, p)); });
    }
  }
}

TEST(Properties, SerializedSizeIsIndependentOfLaunchExtents)
{
  std::vector<std::size_t> sizes;
  for (Coord n : {2, 64, 4096}) {
    const auto tile = Partition::tiling(Point{4, 4});
    const auto t    = testing::make_task("ADD", Domain{n, n},
                                         {testing::R(StoreId{1}, tile), testing::R(StoreId{2}, tile),
                                          testing::W(StoreId{3}, tile)});
    sizes.push_back(serialize(t).size());
    EXPECT_EQ(serialize(tile).size(), serialize(Partition::tiling(Point{n, n})).size());
  }
  EXPECT_EQ(sizes[0], sizes[1]);
  EXPECT_EQ(sizes[1], sizes[2]);
}

}  // namespace
}  // namespace diffuse
