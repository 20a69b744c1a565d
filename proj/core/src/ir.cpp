/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <diffuse/error.hpp>
#include <diffuse/ir.hpp>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cstring>
#include <numeric>
#include <utility>

namespace diffuse {

////////////////////////////////////////////////////
// Point / Domain / Rect
////////////////////////////////////////////////////

Point Point::successor() const
{
  auto coords = coords_;
  for (auto& c : coords) {
    ++c;
  }
  return Point{std::move(coords)};
}

Domain::Domain(std::initializer_list<Coord> extents) : Domain{std::vector<Coord>(extents)} {}

Domain::Domain(std::vector<Coord> extents) : extents_{std::move(extents)}
{
  if (extents_.empty()) {
    throw Error{ErrorCode::MalformedTask, "domain must have rank >= 1"};
  }
  for (auto e : extents_) {
    if (e < 1) {
      throw Error{ErrorCode::MalformedTask, fmt::format("domain extents must be positive, got {}", extents_)};
    }
  }
}

std::size_t Domain::volume() const noexcept
{
  std::size_t v = 1;
  for (auto e : extents_) {
    v *= static_cast<std::size_t>(e);
  }
  return v;
}

bool Domain::contains(const Point& point) const noexcept
{
  if (point.rank() != rank()) {
    return false;
  }
  for (std::size_t d = 0; d < rank(); ++d) {
    if (point[d] < 0 || point[d] >= extents_[d]) {
      return false;
    }
  }
  return true;
}

std::size_t Domain::linearize(const Point& point) const
{
  std::size_t index = 0;
  for (std::size_t d = 0; d < rank(); ++d) {
    index = index * static_cast<std::size_t>(extents_[d]) + static_cast<std::size_t>(point[d]);
  }
  return index;
}

Point Domain::delinearize(std::size_t index) const
{
  std::vector<Coord> coords(rank());
  for (std::size_t d = rank(); d-- > 0;) {
    coords[d] = static_cast<Coord>(index % static_cast<std::size_t>(extents_[d]));
    index /= static_cast<std::size_t>(extents_[d]);
  }
  return Point{std::move(coords)};
}

void Domain::for_each_point(const std::function<void(const Point&)>& fn) const
{
  const auto n = volume();
  for (std::size_t i = 0; i < n; ++i) {
    fn(delinearize(i));
  }
}

bool Rect::empty() const noexcept
{
  for (std::size_t d = 0; d < rank(); ++d) {
    if (hi[d] <= lo[d]) {
      return true;
    }
  }
  return false;
}

std::size_t Rect::volume() const noexcept
{
  if (empty()) {
    return 0;
  }
  std::size_t v = 1;
  for (std::size_t d = 0; d < rank(); ++d) {
    v *= static_cast<std::size_t>(hi[d] - lo[d]);
  }
  return v;
}

std::vector<Coord> Rect::extents() const
{
  std::vector<Coord> out(rank());
  for (std::size_t d = 0; d < rank(); ++d) {
    out[d] = std::max<Coord>(0, hi[d] - lo[d]);
  }
  return out;
}

bool Rect::contains(std::span<const Coord> element) const noexcept
{
  if (element.size() != rank()) {
    return false;
  }
  for (std::size_t d = 0; d < rank(); ++d) {
    if (element[d] < lo[d] || element[d] >= hi[d]) {
      return false;
    }
  }
  return true;
}

bool Rect::intersects(const Rect& other) const noexcept
{
  if (other.rank() != rank() || empty() || other.empty()) {
    return false;
  }
  for (std::size_t d = 0; d < rank(); ++d) {
    if (std::max(lo[d], other.lo[d]) >= std::min(hi[d], other.hi[d])) {
      return false;
    }
  }
  return true;
}

Rect Store::bounds() const { return Rect{std::vector<Coord>(shape.rank(), 0), shape.extents()}; }

void StoreCatalog::add(const Store& store)
{
  if (!stores_.emplace(store.id, store).second) {
    throw Error{ErrorCode::MalformedTask, fmt::format("store {} created twice", store.id.value)};
  }
}

const Store& StoreCatalog::at(StoreId id) const
{
  auto it = stores_.find(id);
  if (it == stores_.end()) {
    throw Error{ErrorCode::UnknownId, fmt::format("unknown store {}", id.value)};
  }
  return it->second;
}

////////////////////////////////////////////////////
// Projection / Partition
////////////////////////////////////////////////////

Projection::Projection(std::vector<std::vector<Coord>> matrix, std::vector<Coord> offset)
  : matrix_{std::move(matrix)}, offset_{std::move(offset)}
{
  if (matrix_.size() != offset_.size() || matrix_.empty()) {
    throw Error{ErrorCode::MalformedPartition, "projection matrix rows must match the offset vector"};
  }
  in_rank_ = matrix_.front().size();
  if (in_rank_ == 0) {
    throw Error{ErrorCode::MalformedPartition, "projection must take at least one coordinate"};
  }
  for (const auto& row : matrix_) {
    if (row.size() != in_rank_) {
      throw Error{ErrorCode::MalformedPartition, "projection matrix is ragged"};
    }
  }
}

Projection Projection::identity(std::size_t rank)
{
  std::vector<std::vector<Coord>> m(rank, std::vector<Coord>(rank, 0));
  for (std::size_t i = 0; i < rank; ++i) {
    m[i][i] = 1;
  }
  return Projection{std::move(m), std::vector<Coord>(rank, 0)};
}

bool Projection::is_identity() const noexcept
{
  if (in_rank_ != out_rank()) {
    return false;
  }
  for (std::size_t i = 0; i < out_rank(); ++i) {
    if (offset_[i] != 0) {
      return false;
    }
    for (std::size_t j = 0; j < in_rank_; ++j) {
      if (matrix_[i][j] != (i == j ? 1 : 0)) {
        return false;
      }
    }
  }
  return true;
}

Point Projection::apply(const Point& point) const
{
  if (point.rank() != in_rank_) {
    throw Error{ErrorCode::MalformedPartition,
                fmt::format("projection expects rank {} points, got rank {}", in_rank_, point.rank())};
  }
  std::vector<Coord> out(out_rank());
  for (std::size_t i = 0; i < out_rank(); ++i) {
    Coord acc = offset_[i];
    for (std::size_t j = 0; j < in_rank_; ++j) {
      acc += matrix_[i][j] * point[j];
    }
    out[i] = acc;
  }
  return Point{std::move(out)};
}

Partition Partition::tiling(Point tile, Point offset, Projection projection)
{
  if (offset.rank() == 0) {
    offset = Point{std::vector<Coord>(tile.rank(), 0)};
  }
  if (tile.rank() == 0 || offset.rank() != tile.rank() || projection.out_rank() != tile.rank()) {
    throw Error{ErrorCode::MalformedPartition, "tile, offset and projection output ranks must agree"};
  }
  for (auto t : tile.coords()) {
    if (t < 0) {
      throw Error{ErrorCode::MalformedPartition, "tile extents must be non-negative"};
    }
  }
  Partition p;
  p.kind_ = Tiling{std::move(tile), std::move(offset), std::move(projection)};
  return p;
}

Partition Partition::tiling(Point tile, Point offset)
{
  auto rank = tile.rank();
  return tiling(std::move(tile), std::move(offset), Projection::identity(rank));
}

const Tiling& Partition::as_tiling() const
{
  if (const auto* t = std::get_if<Tiling>(&kind_)) {
    return *t;
  }
  throw Error{ErrorCode::Internal, "partition is not a tiling"};
}

namespace {

void hash_combine(std::size_t& seed, std::size_t v) noexcept
{
  seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

}  // namespace

std::size_t hash_value(const Partition& partition) noexcept
{
  std::size_t seed = partition.is_none() ? 1 : 2;
  if (partition.is_none()) {
    return seed;
  }
  const auto& t = partition.as_tiling();
  for (auto c : t.tile.coords()) {
    hash_combine(seed, std::hash<Coord>{}(c));
  }
  for (auto c : t.offset.coords()) {
    hash_combine(seed, std::hash<Coord>{}(c));
  }
  for (const auto& row : t.projection.matrix()) {
    for (auto c : row) {
      hash_combine(seed, std::hash<Coord>{}(c));
    }
  }
  for (auto c : t.projection.offset()) {
    hash_combine(seed, std::hash<Coord>{}(c));
  }
  return seed;
}

////////////////////////////////////////////////////
// Privileges
////////////////////////////////////////////////////

Privilege join(Privilege lhs, Privilege rhs)
{
  if (lhs == rhs) {
    return lhs;
  }
  if (reduces(lhs) || reduces(rhs)) {
    throw Error{ErrorCode::Internal, "Reduce privilege cannot be joined with Read or Write"};
  }
  return Privilege::ReadWrite;
}

std::string_view to_string(Privilege p) noexcept
{
  switch (p) {
    case Privilege::Read: return "R";
    case Privilege::Write: return "W";
    case Privilege::Reduce: return "Rd";
    case Privilege::ReadWrite: return "RW";
  }
  return "?";
}

std::optional<Privilege> parse_privilege(std::string_view text) noexcept
{
  if (text == "R") {
    return Privilege::Read;
  }
  if (text == "W") {
    return Privilege::Write;
  }
  if (text == "Rd") {
    return Privilege::Reduce;
  }
  if (text == "RW") {
    return Privilege::ReadWrite;
  }
  return std::nullopt;
}

////////////////////////////////////////////////////
// Tasks
////////////////////////////////////////////////////

namespace {

void check_partition_ranks(const Store& store, const Partition& partition, std::size_t launch_rank)
{
  if (partition.is_none()) {
    return;
  }
  const auto& t = partition.as_tiling();
  if (t.tile.rank() != store.shape.rank()) {
    throw Error{ErrorCode::MalformedPartition,
                fmt::format("tiling of rank {} used on store {} of rank {}", t.tile.rank(), store.id.value,
                            store.shape.rank())};
  }
  if (t.projection.in_rank() != launch_rank) {
    throw Error{ErrorCode::MalformedPartition,
                fmt::format("projection expects rank {} launch points, launch domain has rank {}",
                            t.projection.in_rank(), launch_rank)};
  }
}

bool has_arg(const IndexTask& task, StoreId store, const Partition& partition, bool (*pred)(Privilege))
{
  return std::any_of(task.args.begin(), task.args.end(), [&](const StoreArg& a) {
    return a.store == store && pred(a.privilege) && a.partition == partition;
  });
}

}  // namespace

void validate(const IndexTask& task, const StoreCatalog& catalog)
{
  if (task.kind.empty()) {
    throw Error{ErrorCode::MalformedTask, "task kind must be non-empty"};
  }
  if (task.args.empty()) {
    throw Error{ErrorCode::MalformedTask, fmt::format("task {} has no store arguments", task.kind)};
  }
  if (task.launch.rank() == 0) {
    throw Error{ErrorCode::MalformedTask, fmt::format("task {} has no launch domain", task.kind)};
  }
  for (std::size_t i = 0; i < task.args.size(); ++i) {
    const auto& arg = task.args[i];
    check_partition_ranks(catalog.at(arg.store), arg.partition, task.launch.rank());
    for (std::size_t j = 0; j < i; ++j) {
      const auto& prev = task.args[j];
      if (prev.store != arg.store || prev.partition != arg.partition) {
        continue;
      }
      if (prev.privilege != Privilege::Read && arg.privilege != Privilege::Read) {
        throw Error{ErrorCode::MalformedTask,
                    fmt::format("task {} names store {} with the same partition in two written arguments",
                                task.kind, arg.store.value)};
      }
      if (reduces(prev.privilege) || reduces(arg.privilege)) {
        throw Error{ErrorCode::MalformedTask,
                    fmt::format("task {} reduces into store {} and accesses it again through the same partition",
                                task.kind, arg.store.value)};
      }
    }
  }
}

bool task_reads(const IndexTask& task, StoreId store, const Partition& partition)
{
  return has_arg(task, store, partition, &reads);
}

bool task_writes(const IndexTask& task, StoreId store, const Partition& partition)
{
  return has_arg(task, store, partition, &writes);
}

bool task_reduces(const IndexTask& task, StoreId store, const Partition& partition)
{
  return has_arg(task, store, partition, &reduces);
}

namespace {

class ByteWriter {
 public:
  void u64(std::uint64_t v)
  {
    std::byte raw[sizeof v];
    std::memcpy(raw, &v, sizeof v);
    bytes_.insert(bytes_.end(), std::begin(raw), std::end(raw));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v)
  {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof v);
    u64(bits);
  }
  void str(std::string_view s)
  {
    u64(s.size());
    for (char c : s) {
      bytes_.push_back(static_cast<std::byte>(c));
    }
  }
  void coords(const std::vector<Coord>& cs)
  {
    u64(cs.size());
    for (auto c : cs) {
      i64(c);
    }
  }
  void partition(const Partition& p)
  {
    if (p.is_none()) {
      u64(0);
      return;
    }
    u64(1);
    const auto& t = p.as_tiling();
    coords(t.tile.coords());
    coords(t.offset.coords());
    u64(t.projection.out_rank());
    u64(t.projection.in_rank());
    for (const auto& row : t.projection.matrix()) {
      for (auto c : row) {
        i64(c);
      }
    }
    coords(t.projection.offset());
  }
  std::vector<std::byte> take() { return std::move(bytes_); }

 private:
  std::vector<std::byte> bytes_{};
};

}  // namespace

std::vector<std::byte> serialize(const IndexTask& task)
{
  ByteWriter w;
  w.str(task.kind);
  w.coords(task.launch.extents());
  w.u64(task.args.size());
  for (const auto& arg : task.args) {
    w.u64(arg.store.value);
    w.u64(static_cast<std::uint64_t>(arg.privilege));
    w.partition(arg.partition);
  }
  w.u64(task.scalars.size());
  for (const auto& s : task.scalars) {
    w.str(s.name);
    w.f64(s.value);
  }
  return w.take();
}

std::vector<std::byte> serialize(const Partition& partition)
{
  ByteWriter w;
  w.partition(partition);
  return w.take();
}

////////////////////////////////////////////////////
// Sub-store geometry
////////////////////////////////////////////////////

SubStore sub_store_bounds(const Store& store, const Partition& partition, const Point& point)
{
  if (partition.is_none()) {
    return SubStore{store.id, store.bounds()};
  }
  const auto& t = partition.as_tiling();
  const auto rank = store.shape.rank();
  if (t.tile.rank() != rank || t.projection.out_rank() != rank) {
    throw Error{ErrorCode::MalformedPartition,
                fmt::format("tiling of rank {} applied to store {} of rank {}", t.tile.rank(), store.id.value, rank)};
  }
  if (t.projection.in_rank() != point.rank()) {
    throw Error{ErrorCode::MalformedPartition,
                fmt::format("projection expects rank {} points, got {}", t.projection.in_rank(), point.rank())};
  }
  const auto first = t.projection.apply(point);
  const auto last = t.projection.apply(point.successor());
  Rect r{std::vector<Coord>(rank), std::vector<Coord>(rank)};
  for (std::size_t d = 0; d < rank; ++d) {
    const Coord extent = store.shape[d];
    const Coord lo = std::clamp<Coord>(first[d] * t.tile[d] + t.offset[d], 0, extent);
    const Coord hi = std::clamp<Coord>(last[d] * t.tile[d] + t.offset[d], 0, extent);
    r.lo[d] = lo;
    r.hi[d] = std::max(lo, hi);
  }
  return SubStore{store.id, std::move(r)};
}

bool covers(const Store& store, const Partition& partition, const Domain& launch)
{
  if (partition.is_none()) {
    return true;
  }
  const auto& t = partition.as_tiling();
  const auto rank = store.shape.rank();
  if (!t.projection.is_identity() || t.tile.rank() != rank || launch.rank() != rank) {
    return false;
  }
  for (std::size_t d = 0; d < rank; ++d) {
    if (t.offset[d] > 0 || t.tile[d] * launch[d] + t.offset[d] < store.shape[d]) {
      return false;
    }
  }
  return true;
}

std::optional<std::vector<Coord>> uniform_extents(const Store& store, const Partition& partition, const Domain& launch)
{
  if (partition.is_none()) {
    return store.shape.extents();
  }
  const auto& t = partition.as_tiling();
  const auto rank = store.shape.rank();
  if (t.tile.rank() != rank || t.projection.out_rank() != rank || t.projection.in_rank() != launch.rank()) {
    return std::nullopt;
  }
  std::vector<Coord> extents(rank);
  for (std::size_t d = 0; d < rank; ++d) {
    const auto& row = t.projection.matrix()[d];
    Coord row_sum = 0;
    Coord min_c = t.projection.offset()[d];
    Coord max_c = min_c;
    for (std::size_t j = 0; j < row.size(); ++j) {
      row_sum += row[j];
      const Coord reach = row[j] * (launch[j] - 1);
      min_c += std::min<Coord>(0, reach);
      max_c += std::max<Coord>(0, reach);
    }
    const Coord width = row_sum * t.tile[d];
    if (width <= 0) {
      extents[d] = 0;
      continue;
    }
    const Coord lo_min = min_c * t.tile[d] + t.offset[d];
    const Coord hi_max = max_c * t.tile[d] + t.offset[d] + width;
    if (lo_min < 0 || hi_max > store.shape[d]) {
      return std::nullopt;
    }
    extents[d] = width;
  }
  return extents;
}

}  // namespace diffuse
