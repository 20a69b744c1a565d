/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "programs.hpp"

#include <diffuse/error.hpp>
#include <diffuse/ir.hpp>

#include <gtest/gtest.h>

namespace diffuse {
namespace {

using testing::make_task;
using testing::R;
using testing::Rd;
using testing::RW;
using testing::W;

Rect rect(std::vector<Coord> lo, std::vector<Coord> hi) { return Rect{std::move(lo), std::move(hi)}; }

TEST(SubStoreBounds, TwoByTwoTilingOfFourByFour)
{
  const Store s{StoreId{0}, Domain{4, 4}};
  const auto r = sub_store_bounds(s, Partition::tiling(Point{2, 2}), Point{1, 0});
  EXPECT_EQ(r.parent, s.id);
  EXPECT_EQ(r.bounds, rect({2, 0}, {4, 2}));
}

TEST(SubStoreBounds, ReplicationIsWholeStore)
{
  const Store s{StoreId{0}, Domain{4, 4}};
  EXPECT_EQ(sub_store_bounds(s, Partition::none(), Point{3, 3}).bounds, rect({0, 0}, {4, 4}));
}

TEST(SubStoreBounds, DimensionDroppingProjection)
{
  const Store s{StoreId{0}, Domain{4}};
  const auto p = Partition::tiling(Point{1}, Point{0}, Projection{{{1, 0}}, {0}});
  EXPECT_EQ(sub_store_bounds(s, p, Point{2, 1}).bounds, rect({2}, {3}));
}

TEST(SubStoreBounds, OffsetTileClampsToEmpty)
{
  const Store s{StoreId{0}, Domain{4, 4}};
  const auto r = sub_store_bounds(s, Partition::tiling(Point{1, 1}, Point{1, 1}), Point{3, 3}).bounds;
  EXPECT_EQ(r, rect({4, 4}, {4, 4}));
  EXPECT_TRUE(r.empty());
  EXPECT_EQ(r.volume(), 0U);
}

TEST(SubStoreBounds, RankMismatchIsMalformed)
{
  const Store s{StoreId{0}, Domain{4, 4}};
  try {
    (void)sub_store_bounds(s, Partition::tiling(Point{2}), Point{0});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedPartition);
  }
  EXPECT_THROW((void)sub_store_bounds(s, Partition::tiling(Point{2, 2}), Point{0}), Error);
}

TEST(PartitionEq, StructuralIdentity)
{
  EXPECT_TRUE(partition_eq(Partition::tiling(Point{2, 2}, Point{0, 0}), Partition::tiling(Point{2, 2}, Point{0, 0})));
}

TEST(PartitionEq, DifferentTileShapes)
{
  EXPECT_FALSE(partition_eq(Partition::tiling(Point{2, 2}), Partition::tiling(Point{1, 4})));
}

TEST(PartitionEq, DifferentVariantsEvenWhenBothCover)
{
  const Store s{StoreId{0}, Domain{4, 4}};
  const auto whole = Partition::tiling(Point{4, 4});
  EXPECT_FALSE(partition_eq(Partition::none(), whole));
  EXPECT_TRUE(covers(s, Partition::none(), Domain{1, 1}));
  EXPECT_TRUE(covers(s, whole, Domain{1, 1}));
}

TEST(PartitionEq, ProjectionsParticipate)
{
  const auto id   = Partition::tiling(Point{2, 2});
  const auto swap = Partition::tiling(Point{2, 2}, Point{0, 0}, Projection{{{0, 1}, {1, 0}}, {0, 0}});
  EXPECT_FALSE(partition_eq(id, swap));
  EXPECT_TRUE(partition_eq(id, Partition::tiling(Point{2, 2}, Point{0, 0}, Projection::identity(2))));
}

TEST(Covers, FullTiling)
{
  EXPECT_TRUE(covers(Store{StoreId{0}, Domain{4, 4}}, Partition::tiling(Point{2, 2}), Domain{2, 2}));
}

TEST(Covers, OffsetTilingMissesOrigin)
{
  EXPECT_FALSE(covers(Store{StoreId{0}, Domain{4, 4}}, Partition::tiling(Point{1, 1}, Point{1, 1}), Domain{4, 4}));
}

TEST(Covers, ReplicationAlwaysCovers)
{
  EXPECT_TRUE(covers(Store{StoreId{0}, Domain{7}}, Partition::none(), Domain{3}));
  EXPECT_TRUE(covers(Store{StoreId{0}, Domain{5, 9}}, Partition::none(), Domain{2, 2}));
}

TEST(Covers, NonIdentityProjectionIsConservative)
{
  const auto p = Partition::tiling(Point{1}, Point{0}, Projection{{{1, 0}}, {0}});
  EXPECT_FALSE(covers(Store{StoreId{0}, Domain{4}}, p, Domain{4, 4}));
}

TEST(Covers, ShortTilingDoesNotCover)
{
  EXPECT_FALSE(covers(Store{StoreId{0}, Domain{10}}, Partition::tiling(Point{3}), Domain{3}));
  EXPECT_TRUE(covers(Store{StoreId{0}, Domain{10}}, Partition::tiling(Point{4}), Domain{3}));
}

TEST(Predicates, ReadOnlyArgument)
{
  const auto p = Partition::tiling(Point{2});
  const auto t = make_task("ADD", Domain{2}, {R(StoreId{0}, p), R(StoreId{1}, p), W(StoreId{2}, p)});
  EXPECT_TRUE(task_reads(t, StoreId{0}, p));
  EXPECT_FALSE(task_writes(t, StoreId{0}, p));
  EXPECT_FALSE(task_reads(t, StoreId{0}, Partition::none()));
}

TEST(Predicates, ReadWriteImpliesBoth)
{
  const auto p = Partition::tiling(Point{2});
  const auto t = make_task("AXPY", Domain{2}, {R(StoreId{0}, p), RW(StoreId{1}, p)}, {{"alpha", 2.0}});
  EXPECT_TRUE(task_reads(t, StoreId{1}, p));
  EXPECT_TRUE(task_writes(t, StoreId{1}, p));
}

TEST(Predicates, ReduceIsNeitherReadNorWrite)
{
  const auto p = Partition::tiling(Point{2});
  const auto t = make_task("SUM", Domain{2}, {R(StoreId{0}, p), Rd(StoreId{1})});
  EXPECT_TRUE(task_reduces(t, StoreId{1}, Partition::none()));
  EXPECT_FALSE(task_reads(t, StoreId{1}, Partition::none()));
  EXPECT_FALSE(task_writes(t, StoreId{1}, Partition::none()));
}

TEST(Privileges, JoinAndParse)
{
  EXPECT_EQ(join(Privilege::Read, Privilege::Write), Privilege::ReadWrite);
  EXPECT_EQ(join(Privilege::Read, Privilege::Read), Privilege::Read);
  EXPECT_EQ(join(Privilege::Write, Privilege::Write), Privilege::Write);
  EXPECT_EQ(join(Privilege::Reduce, Privilege::Reduce), Privilege::Reduce);
  EXPECT_THROW((void)join(Privilege::Reduce, Privilege::Read), Error);
  for (auto p : {Privilege::Read, Privilege::Write, Privilege::Reduce, Privilege::ReadWrite}) {
    EXPECT_EQ(parse_privilege(to_string(p)), p);
  }
  EXPECT_FALSE(parse_privilege("X").has_value());
}

TEST(Validate, RejectsDuplicateWrittenPairs)
{
  StoreCatalog c;
  c.add(Store{StoreId{0}, Domain{4}});
  c.add(Store{StoreId{1}, Domain{4}});
  const auto p = Partition::tiling(Point{2});
  EXPECT_NO_THROW(validate(make_task("ADD", Domain{2}, {R(StoreId{0}, p), R(StoreId{0}, p), W(StoreId{1}, p)}), c));
  EXPECT_THROW(validate(make_task("X", Domain{2}, {W(StoreId{1}, p), W(StoreId{1}, p)}), c), Error);
  EXPECT_THROW(validate(make_task("X", Domain{2}, {R(StoreId{7}, p)}), c), Error);
  EXPECT_THROW(validate(make_task("X", Domain{2}, {}), c), Error);
  EXPECT_THROW(validate(make_task("X", Domain{2}, {R(StoreId{0}, Partition::tiling(Point{2, 2}))}), c), Error);
}

TEST(Serialize, PartitionSizeIgnoresExtentMagnitude)
{
  EXPECT_EQ(serialize(Partition::tiling(Point{2, 2})).size(), serialize(Partition::tiling(Point{4096, 4096})).size());
}

TEST(DomainTest, LinearizeRoundTrip)
{
  const Domain d{3, 4, 5};
  EXPECT_EQ(d.volume(), 60U);
  for (std::size_t i = 0; i < d.volume(); ++i) {
    EXPECT_EQ(d.linearize(d.delinearize(i)), i);
  }
  std::vector<Point> order;
  Domain{2, 2}.for_each_point([&](const Point& p) { order.push_back(p); });
  EXPECT_EQ(order, (std::vector<Point>{{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
  EXPECT_TRUE(d.contains(Point{2, 3, 4}));
  EXPECT_FALSE(d.contains(Point{3, 0, 0}));
}

}  // namespace
}  // namespace diffuse
