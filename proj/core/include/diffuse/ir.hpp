/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace diffuse {

using Coord = std::int64_t;

////////////////////////////////////////////////////
// Points, domains, rectangles
////////////////////////////////////////////////////

class Point {
 public:
  Point() = default;
  Point(std::initializer_list<Coord> coords) : coords_{coords} {}
  explicit Point(std::vector<Coord> coords) : coords_{std::move(coords)} {}

  [[nodiscard]] std::size_t rank() const noexcept { return coords_.size(); }
  [[nodiscard]] Coord operator[](std::size_t dim) const { return coords_[dim]; }
  [[nodiscard]] Coord& operator[](std::size_t dim) { return coords_[dim]; }
  [[nodiscard]] const std::vector<Coord>& coords() const noexcept { return coords_; }

  /// Adds one to every coordinate.
  [[nodiscard]] Point successor() const;

  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point&, const Point&) = default;

 private:
  std::vector<Coord> coords_{};
};

/// A rectangular index space [0, extents).
class Domain {
 public:
  Domain() = default;
  Domain(std::initializer_list<Coord> extents);
  explicit Domain(std::vector<Coord> extents);

  [[nodiscard]] std::size_t rank() const noexcept { return extents_.size(); }
  [[nodiscard]] const std::vector<Coord>& extents() const noexcept { return extents_; }
  [[nodiscard]] Coord operator[](std::size_t dim) const { return extents_[dim]; }
  [[nodiscard]] std::size_t volume() const noexcept;
  [[nodiscard]] bool contains(const Point& point) const noexcept;

  /// Row-major position of `point`; the last dimension varies fastest.
  [[nodiscard]] std::size_t linearize(const Point& point) const;
  [[nodiscard]] Point delinearize(std::size_t index) const;

  /// Visits every point in lexicographic order.
  void for_each_point(const std::function<void(const Point&)>& fn) const;

  friend bool operator==(const Domain&, const Domain&) = default;

 private:
  std::vector<Coord> extents_{};
};

/// Half-open rectangle [lo, hi) in element coordinates; hi == lo in some dimension means empty.
struct Rect {
  std::vector<Coord> lo{};
  std::vector<Coord> hi{};

  [[nodiscard]] std::size_t rank() const noexcept { return lo.size(); }
  [[nodiscard]] bool empty() const noexcept;
  [[nodiscard]] std::size_t volume() const noexcept;
  [[nodiscard]] std::vector<Coord> extents() const;
  [[nodiscard]] bool contains(std::span<const Coord> element) const noexcept;
  [[nodiscard]] bool intersects(const Rect& other) const noexcept;

  friend bool operator==(const Rect&, const Rect&) = default;
};

////////////////////////////////////////////////////
// Stores
////////////////////////////////////////////////////

struct StoreId {
  std::uint32_t value{};

  friend bool operator==(StoreId, StoreId) = default;
  friend auto operator<=>(StoreId, StoreId) = default;
};

struct Store {
  StoreId id{};
  Domain shape{};  // element counts; elements are 64-bit floats

  [[nodiscard]] Rect bounds() const;
};

}  // namespace diffuse

template <>
struct std::hash<diffuse::StoreId> {
  std::size_t operator()(diffuse::StoreId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};

namespace diffuse {

/// Shape table for every store created in a session.
class StoreCatalog {
 public:
  void add(const Store& store);
  [[nodiscard]] bool contains(StoreId id) const noexcept { return stores_.contains(id); }
  [[nodiscard]] const Store& at(StoreId id) const;
  [[nodiscard]] std::size_t size() const noexcept { return stores_.size(); }

 private:
  std::unordered_map<StoreId, Store> stores_{};
};

////////////////////////////////////////////////////
// Partitions
////////////////////////////////////////////////////

/// Integer affine map p -> A*p + b from launch coordinates to tile coordinates.
class Projection {
 public:
  Projection() = default;
  Projection(std::vector<std::vector<Coord>> matrix, std::vector<Coord> offset);

  [[nodiscard]] static Projection identity(std::size_t rank);

  [[nodiscard]] std::size_t in_rank() const noexcept { return in_rank_; }
  [[nodiscard]] std::size_t out_rank() const noexcept { return offset_.size(); }
  [[nodiscard]] const std::vector<std::vector<Coord>>& matrix() const noexcept { return matrix_; }
  [[nodiscard]] const std::vector<Coord>& offset() const noexcept { return offset_; }
  [[nodiscard]] bool is_identity() const noexcept;

  [[nodiscard]] Point apply(const Point& point) const;

  friend bool operator==(const Projection&, const Projection&) = default;

 private:
  std::vector<std::vector<Coord>> matrix_{};  // out_rank rows, in_rank columns
  std::vector<Coord> offset_{};
  std::size_t in_rank_{};
};

struct Tiling {
  Point tile{};
  Point offset{};
  Projection projection{};

  friend bool operator==(const Tiling&, const Tiling&) = default;
};

/// Structured, scale-free mapping from launch points to sub-stores. Equality is structural and
/// never looks at the points of a launch domain.
class Partition {
 public:
  /// Replication: every launch point maps to the whole store.
  [[nodiscard]] static Partition none() { return Partition{}; }
  [[nodiscard]] static Partition tiling(Point tile, Point offset, Projection projection);
  /// Tiling with the identity projection for `tile.rank()`-dimensional launches.
  [[nodiscard]] static Partition tiling(Point tile, Point offset = {});

  [[nodiscard]] bool is_none() const noexcept { return std::holds_alternative<std::monostate>(kind_); }
  [[nodiscard]] const Tiling& as_tiling() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::variant<std::monostate, Tiling> kind_{};
};

[[nodiscard]] inline bool partition_eq(const Partition& lhs, const Partition& rhs) { return lhs == rhs; }

[[nodiscard]] std::size_t hash_value(const Partition& partition) noexcept;

////////////////////////////////////////////////////
// Privileges and tasks
////////////////////////////////////////////////////

/// Reduce always combines with sum.
enum class Privilege : std::uint8_t { Read, Write, Reduce, ReadWrite };

[[nodiscard]] constexpr bool reads(Privilege p) noexcept { return p == Privilege::Read || p == Privilege::ReadWrite; }
[[nodiscard]] constexpr bool writes(Privilege p) noexcept { return p == Privilege::Write || p == Privilege::ReadWrite; }
[[nodiscard]] constexpr bool reduces(Privilege p) noexcept { return p == Privilege::Reduce; }

/// Least upper bound of two uses of the same (store, partition). Mixing Reduce with anything
/// else has no join and throws.
[[nodiscard]] Privilege join(Privilege lhs, Privilege rhs);

[[nodiscard]] std::string_view to_string(Privilege p) noexcept;
[[nodiscard]] std::optional<Privilege> parse_privilege(std::string_view text) noexcept;

struct StoreArg {
  StoreId store{};
  Partition partition{};
  Privilege privilege{Privilege::Read};

  friend bool operator==(const StoreArg&, const StoreArg&) = default;
};

struct ScalarParam {
  std::string name{};
  double value{};

  friend bool operator==(const ScalarParam&, const ScalarParam&) = default;
};

struct IndexTask {
  std::string kind{};
  Domain launch{};
  std::vector<StoreArg> args{};
  std::vector<ScalarParam> scalars{};

  friend bool operator==(const IndexTask&, const IndexTask&) = default;
};

/// Checks argument/partition ranks against the catalog and the uniqueness of written
/// (store, partition) pairs. Throws MalformedTask / MalformedPartition / UnknownId.
void validate(const IndexTask& task, const StoreCatalog& catalog);

[[nodiscard]] bool task_reads(const IndexTask& task, StoreId store, const Partition& partition);
[[nodiscard]] bool task_writes(const IndexTask& task, StoreId store, const Partition& partition);
[[nodiscard]] bool task_reduces(const IndexTask& task, StoreId store, const Partition& partition);

/// Fixed-width binary encoding. Its size depends on ranks and argument counts only, never on
/// the magnitude of launch extents.
[[nodiscard]] std::vector<std::byte> serialize(const IndexTask& task);
[[nodiscard]] std::vector<std::byte> serialize(const Partition& partition);

////////////////////////////////////////////////////
// Reasoning constructs
////////////////////////////////////////////////////

struct SubStore {
  StoreId parent{};
  Rect bounds{};

  friend bool operator==(const SubStore&, const SubStore&) = default;
};

/// Bounding box of the sub-store that `partition` assigns to launch point `point`, clamped to
/// the store. Throws MalformedPartition on rank mismatch.
[[nodiscard]] SubStore sub_store_bounds(const Store& store, const Partition& partition, const Point& point);

/// Whether the union of sub-stores over `launch` is the whole store. Exact for replication and
/// identity tilings, false for every other projection.
[[nodiscard]] bool covers(const Store& store, const Partition& partition, const Domain& launch);

/// Sub-store extents when they are the same at every point of `launch`, computed in closed form.
/// std::nullopt when clamping makes them vary (or ranks do not line up).
[[nodiscard]] std::optional<std::vector<Coord>> uniform_extents(const Store& store,
                                                                const Partition& partition,
                                                                const Domain& launch);

struct TaskWindow {
  std::vector<IndexTask> tasks{};
  std::set<StoreId> live_app_refs{};
  std::vector<IndexTask> pending_after{};
};

}  // namespace diffuse
