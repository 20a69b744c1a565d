/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <diffuse/ir.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace diffuse {

// Brute-force dependence reasoning over individual point tasks. Everything here enumerates
// launch domains, so it is only meant for validating the scale-free analysis on small inputs.

inline constexpr std::size_t kDefaultOracleCap = 4096;

struct Access {
  SubStore sub_store{};
  Privilege privilege{Privilege::Read};
};

struct PointTaskView {
  std::size_t parent_task{};
  Point point{};
  std::vector<Access> accesses{};
};

[[nodiscard]] PointTaskView point_task(const IndexTask& task,
                                       std::size_t parent_task,
                                       const Point& point,
                                       const StoreCatalog& catalog);

/// True, anti and reduction dependences between two point tasks, `first` preceding `second`.
/// Two reductions into the same data never depend on each other.
[[nodiscard]] bool dep(const PointTaskView& first, const PointTaskView& second);

/// For every point of the first task, the (linearized) points of the second task that depend on it.
class DependenceMap {
 public:
  DependenceMap(Domain from, Domain to) : from_{std::move(from)}, to_{std::move(to)}, targets_(from_.volume()) {}

  [[nodiscard]] const Domain& from() const noexcept { return from_; }
  [[nodiscard]] const Domain& to() const noexcept { return to_; }

  void add(std::size_t from_index, std::size_t to_index) { targets_[from_index].push_back(to_index); }
  [[nodiscard]] std::vector<Point> at(const Point& p) const;

  /// D[p] is a subset of {p} for every p, with both tasks on the same domain.
  [[nodiscard]] bool is_pointwise() const;
  [[nodiscard]] bool empty() const;

 private:
  Domain from_;
  Domain to_;
  std::vector<std::vector<std::size_t>> targets_;
};

/// Throws OracleTooLarge when either launch domain exceeds `cap` points.
[[nodiscard]] DependenceMap dependence_map(const IndexTask& first,
                                           const IndexTask& second,
                                           const StoreCatalog& catalog,
                                           std::size_t cap = kDefaultOracleCap);

/// Whether every ordered pair in `tasks` has a point-wise dependence map over one shared domain.
[[nodiscard]] bool oracle_fusible(std::span<const IndexTask> tasks,
                                  const StoreCatalog& catalog,
                                  std::size_t cap = kDefaultOracleCap);

/// Overlap between two distinct point tasks of a single index task where at least one side
/// writes. Reported for diagnostics only.
struct Interference {
  StoreId store{};
  Point first{};
  Point second{};
  bool write_write{};
};

[[nodiscard]] std::vector<Interference> find_interference(const IndexTask& task,
                                                          const StoreCatalog& catalog,
                                                          std::size_t cap = kDefaultOracleCap);

}  // namespace diffuse
